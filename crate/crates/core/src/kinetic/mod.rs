//! Linear Boltzmann jump process on an energy shell, the diffusion constant
//! it induces, Wigner transforms and a small split-step Schrödinger sandbox.

pub mod jump;
pub mod schrodinger;
pub mod shell;
pub mod wigner;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use jump::*;
pub use schrodinger::*;
pub use shell::*;
pub use wigner::*;

/// Independent stream for task `index` under `master`, so results do not
/// depend on how tasks are spread over threads.
pub fn task_rng(master: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng
}
