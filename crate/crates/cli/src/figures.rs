//! Curve data for the probability figures, parameters fixed per panel.

use std::fmt;
use std::str::FromStr;

use anyhow::Result;
use dfock_core::demod::{coherent_demodulate, make_am_qubit, swap_demodulate, teleport_am, AmBranch, Strategy};
use dfock_core::protocol::{success_probability, ChannelSpec, QubitSpec};
use rayon::prelude::*;

use crate::table::CurvePoint;
use crate::usage;

/// Largest value accepted as a probability before rounding is blamed.
pub const PROBABILITY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    F2a,
    F2b,
    F2c,
    F2d,
    F3a,
    F3b,
    F3c,
    F3d,
    F4a,
    F4b,
    F5a,
    F5b,
}

pub const ALL_FIGURES: [FigureId; 12] = [
    FigureId::F2a,
    FigureId::F2b,
    FigureId::F2c,
    FigureId::F2d,
    FigureId::F3a,
    FigureId::F3b,
    FigureId::F3c,
    FigureId::F3d,
    FigureId::F4a,
    FigureId::F4b,
    FigureId::F5a,
    FigureId::F5b,
];

impl FigureId {
    pub fn name(self) -> &'static str {
        match self {
            FigureId::F2a => "2a",
            FigureId::F2b => "2b",
            FigureId::F2c => "2c",
            FigureId::F2d => "2d",
            FigureId::F3a => "3a",
            FigureId::F3b => "3b",
            FigureId::F3c => "3c",
            FigureId::F3d => "3d",
            FigureId::F4a => "4a",
            FigureId::F4b => "4b",
            FigureId::F5a => "5a",
            FigureId::F5b => "5b",
        }
    }

    fn panel(self) -> Panel {
        use AmBranch::{K, N};
        match self {
            FigureId::F2a => Panel::Outcomes { k: 0, n: 1, third: 2, alpha: 0.2 },
            FigureId::F2b => Panel::Outcomes { k: 0, n: 2, third: 1, alpha: 0.2 },
            FigureId::F2c => Panel::Outcomes { k: 0, n: 3, third: 2, alpha: 0.1 },
            FigureId::F2d => Panel::Outcomes { k: 1, n: 2, third: 3, alpha: 0.2 },
            FigureId::F3a => Panel::Modulated { k: 0, n: 1, branch: K, third: 2, alpha: 0.2 },
            FigureId::F3b => Panel::Modulated { k: 0, n: 1, branch: N, third: 2, alpha: 0.3 },
            FigureId::F3c => Panel::Modulated { k: 1, n: 2, branch: K, third: 3, alpha: 0.1 },
            FigureId::F3d => Panel::Modulated { k: 1, n: 2, branch: N, third: 0, alpha: 0.2 },
            FigureId::F4a => Panel::Demodulated { strategy: Strategy::Coherent, branch: K },
            FigureId::F4b => Panel::Demodulated { strategy: Strategy::Coherent, branch: N },
            FigureId::F5a => Panel::Demodulated { strategy: Strategy::Swap, branch: K },
            FigureId::F5b => Panel::Demodulated { strategy: Strategy::Swap, branch: N },
        }
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        ALL_FIGURES
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown figure {s:?}; expected one of 2a-2d, 3a-3d, 4a, 4b, 5a, 5b"))
    }
}

enum Panel {
    /// Curves: `P_k`, `P_n`, `P_third`, `P_k + P_n`.
    Outcomes { k: usize, n: usize, third: usize, alpha: f64 },
    /// Teleporting an AM qubit. Curves: the recovering outcome, its partner,
    /// `P_third`, and the sum of the first two.
    Modulated { k: usize, n: usize, branch: AmBranch, third: usize, alpha: f64 },
    /// One curve per `alpha = 0.1 i`, `i = 1..=8`, for the `(0, 1)` qubit.
    Demodulated { strategy: Strategy, branch: AmBranch },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FigureParams {
    /// Replaces the panel's `alpha`; for families, leaves a single curve.
    pub alpha: Option<f64>,
    /// Channel amplitude; only even-difference panels depend on it.
    pub beta: f64,
    pub points: usize,
}

impl Default for FigureParams {
    fn default() -> Self {
        FigureParams { alpha: None, beta: DEFAULT_FIGURE_BETA, points: DEFAULT_POINTS }
    }
}

pub const DEFAULT_FIGURE_BETA: f64 = 0.1;
pub const DEFAULT_POINTS: usize = 101;

/// `points` evenly spaced values of `|a1|` over `[0, 1]`.
pub fn a1_grid(points: usize) -> Result<Vec<f64>> {
    match points {
        0 => Err(usage("the |a1| grid needs at least one point")),
        1 => Ok(vec![0.0]),
        p => Ok((0..p).map(|i| if i + 1 == p { 1.0 } else { i as f64 / (p - 1) as f64 }).collect()),
    }
}

pub fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(usage(format!("alpha must be positive, got {alpha}")))
    }
}

/// Evaluates one panel on the grid. Points come back ordered by curve, then
/// by `|a1|`, whatever order the workers finish in.
pub fn figure_points(id: FigureId, params: &FigureParams) -> Result<Vec<CurvePoint>> {
    let grid = a1_grid(params.points)?;
    if let Some(a) = params.alpha {
        check_alpha(a)?;
    }
    let per_a1: Vec<Vec<(u32, f64)>> = match id.panel() {
        Panel::Outcomes { k, n, third, alpha } => {
            let alpha = params.alpha.unwrap_or(alpha);
            let ch = ChannelSpec::for_basis(params.beta, k, n)?;
            grid.par_iter()
                .map(|&a1| {
                    let q = QubitSpec::from_magnitude(k, n, a1)?;
                    let p = |m| success_probability(&q, m, alpha, &ch);
                    let (pk, pn, pt) = (p(k)?, p(n)?, p(third)?);
                    Ok(vec![(1, pk), (2, pn), (3, pt), (4, pk + pn)])
                })
                .collect::<Result<_>>()?
        }
        Panel::Modulated { k, n, branch, third, alpha } => {
            let alpha = params.alpha.unwrap_or(alpha);
            let ch = ChannelSpec::for_basis(params.beta, k, n)?;
            let (target, partner) = match branch {
                AmBranch::K => (k, n),
                AmBranch::N => (n, k),
            };
            let top = k.max(n).max(third);
            grid.par_iter()
                .map(|&a1| {
                    let am = make_am_qubit(&QubitSpec::from_magnitude(k, n, a1)?, branch, alpha)?;
                    let table = teleport_am(&am, &ch, top)?;
                    let p = |m: usize| table.outcome(m).map_or(0.0, |o| o.probability);
                    Ok(vec![(1, p(target)), (2, p(partner)), (3, p(third)), (4, p(target) + p(partner))])
                })
                .collect::<Result<_>>()?
        }
        Panel::Demodulated { strategy, branch } => {
            let alphas: Vec<(u32, f64)> = match params.alpha {
                Some(a) => vec![(1, a)],
                None => (1..=8).map(|i| (i, 0.1 * i as f64)).collect(),
            };
            grid.par_iter()
                .map(|&a1| {
                    let q = QubitSpec::from_magnitude(0, 1, a1)?;
                    alphas
                        .iter()
                        .map(|&(curve, alpha)| {
                            let am = make_am_qubit(&q, branch, alpha)?;
                            let out = match strategy {
                                Strategy::Coherent => coherent_demodulate(&am)?,
                                Strategy::Swap => swap_demodulate(&am)?,
                            };
                            Ok((curve, out.probability))
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<_>>()?
        }
    };
    let curves = per_a1.first().map_or(0, Vec::len);
    let mut points = Vec::with_capacity(curves * grid.len());
    for c in 0..curves {
        for (a1, row) in grid.iter().zip(&per_a1) {
            let (curve, value) = row[c];
            check_probability(value)?;
            points.push(CurvePoint { a1: *a1, curve, value });
        }
    }
    Ok(points)
}

pub fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0 + PROBABILITY_SLACK).contains(&p) {
        Ok(())
    } else {
        Err(dfock_core::Error::Probability(p).into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_parse() {
        for f in ALL_FIGURES {
            assert_eq!(f.name().parse::<FigureId>().unwrap(), f);
        }
        assert!("6a".parse::<FigureId>().is_err());
    }

    #[test]
    fn grid_shape() {
        let g = a1_grid(101).unwrap();
        assert_eq!(g.len(), 101);
        assert_eq!((g[0], g[50], g[100]), (0.0, 0.5, 1.0));
        assert!(a1_grid(0).is_err());
    }

    #[test]
    fn first_panel_endpoints() {
        let pts = figure_points(FigureId::F2a, &FigureParams { points: 11, ..Default::default() }).unwrap();
        let at = |curve: u32, a1: f64| pts.iter().find(|p| p.curve == curve && p.a1 == a1).unwrap().value;
        assert!((at(4, 0.0) - 0.9992).abs() < 1e-4);
        assert!((at(1, 1.0) - (-0.04f64).exp() * 0.04).abs() < 1e-12);
    }

    #[test]
    fn family_override_leaves_one_curve() {
        let params = FigureParams { alpha: Some(0.3), points: 5, ..Default::default() };
        let pts = figure_points(FigureId::F5a, &params).unwrap();
        assert_eq!(pts.len(), 5);
        assert!(pts.iter().all(|p| p.curve == 1));
    }
}
