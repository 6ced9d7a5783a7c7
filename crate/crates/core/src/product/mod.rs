//! Product vectors in subspaces.

pub mod exact;
pub mod bipartite;
pub mod forms;
pub mod homotopy;
pub mod qutrit;
pub mod search;
pub mod takagi;

pub use qutrit::two_qutrit_product_step;
pub use search::{qubit_product_step, range_residual, segre_guarantee, symmetric_product_vectors, ProductSearch, ProductVector, SearchMode, SearchOptions, SearchTranscript};
pub use takagi::{symmetric_decompose_pure, takagi, Takagi};
