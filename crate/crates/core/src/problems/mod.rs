//! Concrete bilevel instances.

pub mod libsvm;
pub mod network;
pub mod pedagogical;
pub mod scalar;
pub mod svm;
pub mod toy;
pub mod transport;

pub use libsvm::{parse_libsvm, LabeledData, SvmDataset};
pub use network::{nine_node_spec, three_node_spec, NetworkSpec};
pub use pedagogical::{build_pedagogical, Pedagogical, PedagogicalUpper};
pub use scalar::ScalarQp;
pub use svm::{build_svm, Svm, SvmDomain};
pub use toy::{build_toy, Toy};
pub use transport::{build_transport, Transport};
