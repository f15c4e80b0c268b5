//! Named scenarios over 10,000-marker universes.
//!
//! Each base has a few "common" markers at 0.1 and many "rare" ones, with
//! `sum p` equal to 5, 10 or 20 expected mutations per tumor:
//!
//! | base | common @ 0.1 | rare            |
//! |------|--------------|-----------------|
//! | m5   | 10           | 9990 @ 4/9990   |
//! | m10  | 20           | 9980 @ 8/9980   |
//! | m20  | 40           | 9960 @ 16/9960  |
//!
//! The m20 base uses 40 common markers so that `sum p = 20`; this also matches
//! the four common blocks of ten in the correlated layouts.
//!
//! The correlated layouts put the common markers in blocks of ten, carve 5000
//! rare markers into 50 blocks of 100, and leave the remaining rare markers
//! independent.

use std::fmt;
use std::str::FromStr;

use super::{MarkerGroup, Perturbation, ScenarioSpec};
use crate::error::{Error, Result};
use crate::priors::RARE_THRESHOLD;

pub const DEFAULT_REPLICATES: usize = 1000;
pub const DEFAULT_SIMS: usize = 5000;
pub const LOGIT_NOISE_SD: f64 = 0.5;
pub const RARE_INFLATION: f64 = 10.0;

const COMMON_P: f64 = 0.1;
const COMMON_BLOCK: usize = 10;
const RARE_BLOCKS: usize = 50;
const RARE_BLOCK: usize = 100;

/// Accepted preset spellings, for help and error messages.
pub const PRESET_FORMS: &str = "table2-{m5,m10,m20}, table3-noise[-mN], table3-inflate[-mN], \
     table4-exclusive[-mN], table4-corr-<rho>[-mN] (or table4-corr(<rho>)); base defaults to m10";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Base {
    M5,
    M10,
    M20,
}

impl Base {
    pub fn n_common(self) -> usize {
        match self {
            Base::M5 => 10,
            Base::M10 => 20,
            Base::M20 => 40,
        }
    }

    pub fn n_rare(self) -> usize {
        10_000 - self.n_common()
    }

    pub fn rare_p(self) -> f64 {
        let rare_mass = match self {
            Base::M5 => 4.0,
            Base::M10 => 8.0,
            Base::M20 => 16.0,
        };
        rare_mass / self.n_rare() as f64
    }

    fn suffix(self) -> &'static str {
        match self {
            Base::M5 => "m5",
            Base::M10 => "m10",
            Base::M20 => "m20",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    Independent(Base),
    LogitNoise(Base),
    RareInflation(Base),
    Exclusive(Base),
    Correlated(Base, f64),
}

impl Preset {
    pub fn base(self) -> Base {
        match self {
            Preset::Independent(b)
            | Preset::LogitNoise(b)
            | Preset::RareInflation(b)
            | Preset::Exclusive(b)
            | Preset::Correlated(b, _) => b,
        }
    }

    pub fn scenario(self, xi: f64) -> Result<ScenarioSpec> {
        let base = self.base();
        let (groups, perturbation) = match self {
            Preset::Independent(_) => (independent_groups(base), Perturbation::None),
            Preset::LogitNoise(_) => (
                independent_groups(base),
                Perturbation::LogitNoise { sigma: LOGIT_NOISE_SD },
            ),
            Preset::RareInflation(_) => (
                independent_groups(base),
                Perturbation::RareInflation {
                    factor: RARE_INFLATION,
                    threshold: RARE_THRESHOLD,
                },
            ),
            Preset::Exclusive(_) => (blocked_groups(base, MarkerGroup::exclusive), Perturbation::None),
            Preset::Correlated(_, rho) => (
                blocked_groups(base, |n, p| MarkerGroup::equicorrelated(n, p, rho)),
                Perturbation::None,
            ),
        };
        let spec = ScenarioSpec {
            groups,
            xi,
            perturbation,
            replicates: DEFAULT_REPLICATES,
            sims: DEFAULT_SIMS,
            alpha: 0.05,
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn independent_groups(base: Base) -> Vec<MarkerGroup> {
    vec![
        MarkerGroup::independent(base.n_common(), COMMON_P),
        MarkerGroup::independent(base.n_rare(), base.rare_p()),
    ]
}

fn blocked_groups(base: Base, block: impl Fn(usize, f64) -> MarkerGroup) -> Vec<MarkerGroup> {
    let mut groups: Vec<MarkerGroup> = (0..base.n_common() / COMMON_BLOCK)
        .map(|_| block(COMMON_BLOCK, COMMON_P))
        .collect();
    groups.extend((0..RARE_BLOCKS).map(|_| block(RARE_BLOCK, base.rare_p())));
    groups.push(MarkerGroup::independent(
        base.n_rare() - RARE_BLOCKS * RARE_BLOCK,
        base.rare_p(),
    ));
    groups
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let base = self.base().suffix();
        match self {
            Preset::Independent(_) => write!(f, "table2-{base}"),
            Preset::LogitNoise(_) => write!(f, "table3-noise-{base}"),
            Preset::RareInflation(_) => write!(f, "table3-inflate-{base}"),
            Preset::Exclusive(_) => write!(f, "table4-exclusive-{base}"),
            Preset::Correlated(_, rho) => write!(f, "table4-corr-{rho}-{base}"),
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(name: &str) -> Result<Self> {
        let unknown = || Error::UnknownPreset {
            name: name.to_string(),
            known: PRESET_FORMS.to_string(),
        };
        let lower = name.trim().to_ascii_lowercase();
        let (kind, base) = [("-m5", Base::M5), ("-m10", Base::M10), ("-m20", Base::M20)]
            .iter()
            .find_map(|(suffix, base)| lower.strip_suffix(suffix).map(|k| (k.to_string(), *base)))
            .unwrap_or((lower.clone(), Base::M10));
        let preset = match kind.as_str() {
            "table2" => Preset::Independent(base),
            "table3-noise" => Preset::LogitNoise(base),
            "table3-inflate" => Preset::RareInflation(base),
            "table4-exclusive" => Preset::Exclusive(base),
            other => {
                let rho = other
                    .strip_prefix("table4-corr-")
                    .or_else(|| other.strip_prefix("table4-corr(").and_then(|r| r.strip_suffix(')')))
                    .ok_or_else(unknown)?;
                let rho: f64 = rho.parse().map_err(|_| unknown())?;
                if !(0.0..1.0).contains(&rho) {
                    return Err(unknown());
                }
                Preset::Correlated(base, rho)
            }
        };
        Ok(preset)
    }
}

/// Looks up a named preset and sets its clonality signal.
pub fn preset_scenario(name: &str, xi: f64) -> Result<ScenarioSpec> {
    name.parse::<Preset>()?.scenario(xi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulation::GroupKind;
    use approx::assert_abs_diff_eq;

    #[test]
    fn mean_mutations_per_tumor() {
        for (name, total) in [("table2-m5", 5.0), ("table2-m10", 10.0), ("table2-m20", 20.0)] {
            let s = preset_scenario(name, 0.0).unwrap();
            assert_eq!(s.n_markers(), 10_000);
            assert_abs_diff_eq!(s.expected_mutations(), total, epsilon = 1e-9);
        }
    }

    #[test]
    fn independent_match_expectations() {
        let sum_p2 = |common: f64, rare: f64, n_rare: f64| common * 0.01 + rare * rare / n_rare;
        for (name, expected) in [
            ("table2-m5", sum_p2(10.0, 4.0, 9990.0)),
            ("table2-m10", sum_p2(20.0, 8.0, 9980.0)),
            ("table2-m20", sum_p2(40.0, 16.0, 9960.0)),
        ] {
            let s = preset_scenario(name, 0.0).unwrap();
            assert_abs_diff_eq!(s.expected_matches_independent(), expected, epsilon = 1e-12);
        }
        let s = preset_scenario("table2-m10", 0.25).unwrap();
        assert_abs_diff_eq!(s.expected_matches_independent(), 2.655, epsilon = 1e-3);
    }

    #[test]
    fn correlated_layout() {
        let s = preset_scenario("table4-corr-0.9-m10", 0.1).unwrap();
        let common = s.groups.iter().filter(|g| g.p == 0.1).count();
        let rare_blocks = s
            .groups
            .iter()
            .filter(|g| g.kind == GroupKind::EquicorrelatedBlock && g.n_markers == 100)
            .count();
        let indep: Vec<_> = s.groups.iter().filter(|g| g.kind == GroupKind::Independent).collect();
        assert_eq!(common, 2);
        assert_eq!(rare_blocks, 50);
        assert_eq!(indep.len(), 1);
        assert_eq!(indep[0].n_markers, 4980);
        assert_abs_diff_eq!(s.expected_mutations(), 10.0, epsilon = 1e-9);
        assert_eq!(s.groups[0].rho, Some(0.9));
    }

    #[test]
    fn exclusive_rare_block_residual_mass() {
        for (base, residual) in [
            ("m5", 9590.0 / 9990.0),
            ("m10", 9180.0 / 9980.0),
            ("m20", 8360.0 / 9960.0),
        ] {
            let s = preset_scenario(&format!("table4-exclusive-{base}"), 0.0).unwrap();
            let block = s.groups.iter().find(|g| g.n_markers == 100).unwrap();
            assert_abs_diff_eq!(1.0 - 100.0 * block.p, residual, epsilon = 1e-12);
        }
    }

    #[test]
    fn names_round_trip() {
        for name in [
            "table2-m5",
            "table3-noise-m20",
            "table3-inflate-m10",
            "table4-exclusive-m5",
            "table4-corr-0.3-m10",
        ] {
            assert_eq!(name.parse::<Preset>().unwrap().to_string(), name);
        }
        assert_eq!(
            "table4-corr(0.9)".parse::<Preset>().unwrap(),
            Preset::Correlated(Base::M10, 0.9)
        );
        assert_eq!(
            "table3-inflate".parse::<Preset>().unwrap(),
            Preset::RareInflation(Base::M10)
        );
        assert!(matches!("table9".parse::<Preset>(), Err(Error::UnknownPreset { .. })));
        assert!("table4-corr-1.5".parse::<Preset>().is_err());
    }
}
