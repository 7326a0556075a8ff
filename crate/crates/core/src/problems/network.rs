//! Transportation network instances and their text file format.
//!
//! ```text
//! # comment
//! omega_t -0.1
//! eps_box 1e-3
//! ridge   1e-3
//! [stations]
//! 1 2 3
//! [links]        # from to build_cost travel_time
//! 1 2 1 1
//! [markets]      # origin destination demand revenue outside_time
//! 1 2 1 2 3
//! ```
//!
//! Scalar lines may appear before the first section or inside `[scalars]`.

use std::collections::HashMap;

use crate::error::{BloccError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub from: usize,
    pub to: usize,
    pub cost: f64,
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Market {
    pub origin: usize,
    pub destination: usize,
    pub demand: f64,
    pub revenue: f64,
    pub outside_time: f64,
}

/// Stations are referred to by index into `stations`.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    pub stations: Vec<String>,
    pub links: Vec<Link>,
    pub markets: Vec<Market>,
    pub omega_t: f64,
    pub eps_box: f64,
    pub ridge: f64,
}

impl NetworkSpec {
    pub fn num_stations(&self) -> usize {
        self.stations.len()
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.stations.len();
        if s == 0 || self.links.is_empty() || self.markets.is_empty() {
            return Err(BloccError::config("network needs stations, links and markets"));
        }
        if !(self.eps_box > 0.0 && self.eps_box < 0.5) {
            return Err(BloccError::config(format!(
                "eps_box must lie in (0, 0.5), got {}",
                self.eps_box
            )));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return Err(BloccError::config(format!("ridge must be nonnegative, got {}", self.ridge)));
        }
        if !self.omega_t.is_finite() {
            return Err(BloccError::config("omega_t must be finite"));
        }
        for (a, l) in self.links.iter().enumerate() {
            if l.from >= s || l.to >= s {
                return Err(BloccError::config(format!("link {a} references an unknown station")));
            }
            if l.from == l.to {
                return Err(BloccError::config(format!("link {a} is a self-loop")));
            }
            if !(l.cost > 0.0 && l.time > 0.0) {
                return Err(BloccError::config(format!("link {a} needs positive cost and time")));
            }
        }
        for (k, m) in self.markets.iter().enumerate() {
            if m.origin >= s || m.destination >= s {
                return Err(BloccError::config(format!("market {k} references an unknown station")));
            }
            if m.origin == m.destination {
                return Err(BloccError::config(format!(
                    "market {k} has origin equal to destination ({})",
                    self.stations[m.origin]
                )));
            }
            if !(m.demand > 0.0 && m.revenue > 0.0 && m.outside_time > 0.0) {
                return Err(BloccError::config(format!(
                    "market {k} needs positive demand, revenue and outside time"
                )));
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        #[derive(PartialEq)]
        enum Section {
            Scalars,
            Stations,
            Links,
            Markets,
        }
        let mut section = Section::Scalars;
        let mut stations: Vec<String> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut raw_links = Vec::new();
        let mut raw_markets = Vec::new();
        let (mut omega_t, mut eps_box, mut ridge) = (None, None, None);

        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') {
                section = match line {
                    "[scalars]" => Section::Scalars,
                    "[stations]" => Section::Stations,
                    "[links]" => Section::Links,
                    "[markets]" => Section::Markets,
                    other => {
                        return Err(BloccError::parse(line_no, format!("unknown section {other}")))
                    }
                };
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            match section {
                Section::Scalars => {
                    let [key, value] = tokens[..] else {
                        return Err(BloccError::parse(line_no, "expected `key value`"));
                    };
                    let v = number(line_no, value)?;
                    let slot = match key {
                        "omega_t" => &mut omega_t,
                        "eps_box" => &mut eps_box,
                        "ridge" => &mut ridge,
                        other => {
                            return Err(BloccError::parse(
                                line_no,
                                format!("unknown key {other:?} (expected omega_t, eps_box, ridge)"),
                            ))
                        }
                    };
                    *slot = Some(v);
                }
                Section::Stations => {
                    for t in tokens {
                        if index.insert(t.to_string(), stations.len()).is_some() {
                            return Err(BloccError::parse(line_no, format!("duplicate station {t}")));
                        }
                        stations.push(t.to_string());
                    }
                }
                Section::Links => {
                    let [from, to, cost, time] = tokens[..] else {
                        return Err(BloccError::parse(line_no, "link rows are `from to cost time`"));
                    };
                    raw_links.push((line_no, from, to, number(line_no, cost)?, number(line_no, time)?));
                }
                Section::Markets => {
                    let [o, d, demand, revenue, t_ext] = tokens[..] else {
                        return Err(BloccError::parse(
                            line_no,
                            "market rows are `origin destination demand revenue outside_time`",
                        ));
                    };
                    raw_markets.push((
                        line_no,
                        o,
                        d,
                        number(line_no, demand)?,
                        number(line_no, revenue)?,
                        number(line_no, t_ext)?,
                    ));
                }
            }
        }

        let lookup = |line_no: usize, name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| BloccError::parse(line_no, format!("unknown station {name}")))
        };
        let links = raw_links
            .into_iter()
            .map(|(ln, from, to, cost, time)| {
                Ok(Link {
                    from: lookup(ln, from)?,
                    to: lookup(ln, to)?,
                    cost,
                    time,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let markets = raw_markets
            .into_iter()
            .map(|(ln, o, d, demand, revenue, outside_time)| {
                Ok(Market {
                    origin: lookup(ln, o)?,
                    destination: lookup(ln, d)?,
                    demand,
                    revenue,
                    outside_time,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let missing = |name: &str| BloccError::config(format!("network file is missing {name}"));
        let spec = Self {
            stations,
            links,
            markets,
            omega_t: omega_t.ok_or_else(|| missing("omega_t"))?,
            eps_box: eps_box.ok_or_else(|| missing("eps_box"))?,
            ridge: ridge.ok_or_else(|| missing("ridge"))?,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "omega_t {}\neps_box {}\nridge {}\n[stations]\n{}\n[links]\n",
            self.omega_t,
            self.eps_box,
            self.ridge,
            self.stations.join(" ")
        );
        for l in &self.links {
            out.push_str(&format!(
                "{} {} {} {}\n",
                self.stations[l.from], self.stations[l.to], l.cost, l.time
            ));
        }
        out.push_str("[markets]\n");
        for m in &self.markets {
            out.push_str(&format!(
                "{} {} {} {} {}\n",
                self.stations[m.origin], self.stations[m.destination], m.demand, m.revenue, m.outside_time
            ));
        }
        out
    }
}

fn number(line_no: usize, tok: &str) -> Result<f64> {
    tok.parse()
        .map_err(|_| BloccError::parse(line_no, format!("bad number {tok:?}")))
}

/// The complete 3-station instance with unit demands.
pub fn three_node_spec() -> NetworkSpec {
    let pairs = [(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)];
    let costs = [1.0, 10.0, 1.0, 3.0, 10.0, 3.0];
    let times = [1.0, 10.0, 1.0, 2.0, 10.0, 2.0];
    let revenues = [2.0, 6.0, 2.0, 1.0, 6.0, 1.0];
    NetworkSpec {
        stations: vec!["1".into(), "2".into(), "3".into()],
        links: pairs
            .iter()
            .zip(costs.iter().zip(&times))
            .map(|(&(from, to), (&cost, &time))| Link { from, to, cost, time })
            .collect(),
        markets: pairs
            .iter()
            .zip(&revenues)
            .map(|(&(origin, destination), &revenue)| Market {
                origin,
                destination,
                demand: 1.0,
                revenue,
                outside_time: 3.0,
            })
            .collect(),
        omega_t: -0.1,
        eps_box: 1e-3,
        ridge: 1e-3,
    }
}

/// A synthetic 9-station instance: 15 two-way segments (30 links) and all
/// 72 ordered station pairs as markets with unit demand.
///
/// Segment layout is a 3×3 grid plus three diagonals. Build costs equal
/// travel times, revenues scale with the shortest in-network travel time,
/// and the outside option takes 1.5 times that long.
pub fn nine_node_spec() -> NetworkSpec {
    const SEGMENTS: [(usize, usize, f64); 15] = [
        (0, 1, 2.0),
        (1, 2, 3.0),
        (3, 4, 2.0),
        (4, 5, 2.0),
        (6, 7, 3.0),
        (7, 8, 2.0),
        (0, 3, 3.0),
        (3, 6, 2.0),
        (1, 4, 1.0),
        (4, 7, 2.0),
        (2, 5, 2.0),
        (5, 8, 3.0),
        (0, 4, 3.0),
        (4, 8, 3.0),
        (2, 4, 4.0),
    ];
    let n = 9;
    let mut links = Vec::with_capacity(30);
    for &(a, b, t) in &SEGMENTS {
        links.push(Link { from: a, to: b, cost: t, time: t });
        links.push(Link { from: b, to: a, cost: t, time: t });
    }

    // Floyd-Warshall over the segment graph.
    let mut dist = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in dist.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for l in &links {
        dist[l.from][l.to] = dist[l.from][l.to].min(l.time);
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = dist[i][k] + dist[k][j];
                if via < dist[i][j] {
                    dist[i][j] = via;
                }
            }
        }
    }

    let mut markets = Vec::with_capacity(72);
    for o in 0..n {
        for d in 0..n {
            if o != d {
                markets.push(Market {
                    origin: o,
                    destination: d,
                    demand: 1.0,
                    revenue: dist[o][d],
                    outside_time: 1.5 * dist[o][d],
                });
            }
        }
    }

    NetworkSpec {
        stations: (1..=n).map(|i| i.to_string()).collect(),
        links,
        markets,
        omega_t: -0.1,
        eps_box: 1e-3,
        ridge: 1e-3,
    }
}
