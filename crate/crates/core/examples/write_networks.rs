//! Writes the built-in networks in the text format read by the CLI.

use blocc::problems::{nine_node_spec, three_node_spec};

fn main() -> std::io::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "data".into());
    std::fs::create_dir_all(&dir)?;
    std::fs::write(format!("{dir}/three_node.net"), three_node_spec().to_text())?;
    std::fs::write(format!("{dir}/nine_node.net"), nine_node_spec().to_text())?;
    Ok(())
}
