//! The five standard scalings and the four blocks of exponent choices built on them.

use num_rational::Rational64;
use serde::Serialize;

use crate::phase::classify::{classify_phase, Phase, PqCase};
use crate::phase::exponents::{int, r, ScalingExponents};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    Ntk,
    MeanField,
    Xavier,
    Kaiming,
    Lazy,
}

impl Scaling {
    pub const ALL: [Scaling; 5] = [Scaling::Ntk, Scaling::MeanField, Scaling::Xavier, Scaling::Kaiming, Scaling::Lazy];

    pub fn name(self) -> &'static str {
        match self {
            Scaling::Ntk => "ntk",
            Scaling::MeanField => "mf",
            Scaling::Xavier => "xavier",
            Scaling::Kaiming => "kaiming",
            Scaling::Lazy => "lazy",
        }
    }

    /// Base exponents with unscaled learning rates.
    pub fn base(self) -> ScalingExponents {
        let z = int(0);
        match self {
            Scaling::Ntk => ScalingExponents::equal_rates(int(1), r(-1, 2), z, z, z),
            Scaling::MeanField => ScalingExponents::equal_rates(int(1), int(-1), z, z, z),
            Scaling::Xavier => ScalingExponents::equal_rates(int(1), z, int(-1), int(-1), z),
            Scaling::Kaiming => ScalingExponents::equal_rates(int(1), z, int(-1), z, z),
            Scaling::Lazy => ScalingExponents::equal_rates(z, int(1), z, z, z),
        }
    }

    /// `P/Q → 1` holds by independence at diverging width, by the zero
    /// initial output at finite width.
    pub fn pq_case(self) -> PqCase {
        match self {
            Scaling::Lazy => PqCase::ZeroOutputInit,
            _ => PqCase::InfiniteWidthIndependent,
        }
    }

    /// Rate exponent of the kernel block; the other blocks follow from the corollaries.
    pub fn kernel_eta(self) -> Rational64 {
        match self {
            Scaling::Ntk | Scaling::MeanField => int(0),
            Scaling::Xavier | Scaling::Lazy => int(-2),
            Scaling::Kaiming => int(-1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Block {
    Base,
    StableRate,
    FeatureLearning,
    Kernel,
}

impl Block {
    pub const ALL: [Block; 4] = [Block::Base, Block::StableRate, Block::FeatureLearning, Block::Kernel];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TableCell {
    pub scaling: Scaling,
    pub block: Block,
    pub exponents: ScalingExponents,
    pub phase: Phase,
}

/// Exponents of one cell, with `c_η` and `c_γ` chosen per block.
pub fn cell_exponents(scaling: Scaling, block: Block) -> ScalingExponents {
    let base = scaling.base();
    match block {
        Block::Base => base,
        Block::StableRate => base.with_eta(crate::phase::classify::stable_learning_rate(&base)),
        Block::FeatureLearning => {
            let (eta, gamma) = crate::phase::classify::force_feature_learning(base.c_u, base.c_w, base.c_d);
            base.with_eta(eta).with_gamma(gamma)
        }
        Block::Kernel => {
            let (eta, gamma) =
                crate::phase::classify::force_kernel(base.c_u, base.c_w, base.c_d, Some(scaling.kernel_eta()))
                    .expect("tabulated kernel rates satisfy the corollary");
            base.with_eta(eta).with_gamma(gamma)
        }
    }
}

/// Tabulated phase of every cell, by block, in the column order of [`Scaling::ALL`].
pub fn reference_phases() -> [(Block, [Phase; 5]); 4] {
    use Phase::*;
    [
        (Block::Base, [Kernel, Frozen, FeatureLearning, Unstable, Unstable]),
        (Block::StableRate, [Kernel, FeatureLearning, FeatureLearning, Kernel, Kernel]),
        (Block::FeatureLearning, [FeatureLearning; 5]),
        (Block::Kernel, [Kernel; 5]),
    ]
}

/// All twenty cells, classified.
pub fn table() -> Vec<TableCell> {
    Block::ALL
        .iter()
        .flat_map(|&block| {
            Scaling::ALL.iter().map(move |&scaling| {
                let exponents = cell_exponents(scaling, block);
                let phase = classify_phase(&exponents, scaling.pq_case()).phase;
                TableCell { scaling, block, exponents, phase }
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corollary_blocks_match_printed_exponents() {
        let eta = |s, b| cell_exponents(s, b).c_eta_u;
        let gamma = |s, b| cell_exponents(s, b).c_gamma;
        let stable: Vec<_> = Scaling::ALL.iter().map(|&s| eta(s, Block::StableRate)).collect();
        assert_eq!(stable, [int(0), int(1), int(0), int(-1), int(-2)]);
        let plus: Vec<_> = Scaling::ALL.iter().map(|&s| (eta(s, Block::FeatureLearning), gamma(s, Block::FeatureLearning))).collect();
        assert_eq!(plus, [(int(1), int(-1)), (int(1), int(-1)), (int(0), int(0)), (int(1), int(-1)), (int(0), int(0))]);
        let minus: Vec<_> = Scaling::ALL.iter().map(|&s| gamma(s, Block::Kernel)).collect();
        assert_eq!(minus, [r(-1, 2), r(-1, 2), int(1), int(0), int(1)]);
    }
}
