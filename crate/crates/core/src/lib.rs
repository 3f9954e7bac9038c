//! Polynomial-encoded QRAM and qLUT circuits: synthesis, classical
//! verification and fault-tolerant resource estimation.

pub mod circuit;
pub mod estimate;
pub mod polyenc;
pub mod qlut;
pub mod qram;
pub mod sim;
pub mod toffopt;
pub mod wordfile;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/encoding.md")]
    mod encoding {}
    #[doc = include_str!("../../../book/src/circuits.md")]
    mod circuits {}
    #[doc = include_str!("../../../book/src/qram.md")]
    mod qram {}
    #[doc = include_str!("../../../book/src/qlut.md")]
    mod qlut {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/estimation.md")]
    mod estimation {}
    #[doc = include_str!("../../../book/src/optimization.md")]
    mod optimization {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
