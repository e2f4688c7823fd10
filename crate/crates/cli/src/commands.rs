//! The work behind each subcommand, separated from argument parsing.

use std::fmt::Write as _;

use anyhow::Result;
use dfock_core::demod::{coherent_demodulate, higher_order, make_am_qubit, swap_demodulate, AmBranch, Strategy};
use dfock_core::displaced::matrix_element;
use dfock_core::fock::{partial_trace, Truncation};
use dfock_core::protocol::{build_hybrid_channel, run_finite, run_ideal, ChannelSpec, QubitSpec};
use dfock_core::C64;
use rayon::prelude::*;

use crate::figures::{a1_grid, check_alpha, check_probability};
use crate::table::{float, MatrixElementRow};
use crate::usage;

/// Raw `c_ln(alpha)` for `l <= lmax`, `n <= nmax`, row-major in `l`.
pub fn matrix_elements(alpha: C64, lmax: usize, nmax: usize) -> Vec<MatrixElementRow> {
    let mut rows = Vec::with_capacity((lmax + 1) * (nmax + 1));
    for l in 0..=lmax {
        for n in 0..=nmax {
            let c = matrix_element(l, n, alpha);
            rows.push(MatrixElementRow { l, n, re: c.re, im: c.im });
        }
    }
    rows
}

pub const DEMOD_HEADER: [&str; 4] = ["alpha", "a1", "value", "formula_id"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemodRequest<'a> {
    pub strategy: Strategy,
    pub branch: AmBranch,
    pub alphas: &'a [f64],
    pub points: usize,
    pub higher_order: bool,
}

pub fn formula_id(strategy: Strategy, branch: AmBranch, higher: bool) -> String {
    let t = match branch {
        AmBranch::K => "P_t1",
        AmBranch::N => "P_t2",
    };
    let s = match strategy {
        Strategy::Coherent => "c",
        Strategy::Swap => "s",
    };
    if higher {
        format!("{t}^{s}_m2")
    } else {
        format!("{t}^{s}")
    }
}

/// Rows `alpha, a1, value, formula_id` ordered by `alpha`, then `|a1|`, with
/// the three-outcome value right after the base value when requested.
pub fn demod_rows(req: &DemodRequest<'_>) -> Result<Vec<Vec<String>>> {
    if req.alphas.is_empty() {
        return Err(usage("at least one --alpha is required"));
    }
    for &a in req.alphas {
        check_alpha(a)?;
    }
    let grid = a1_grid(req.points)?;
    let cells: Vec<(f64, f64)> = req.alphas.iter().flat_map(|&a| grid.iter().map(move |&x| (a, x))).collect();
    let base_id = formula_id(req.strategy, req.branch, false);
    let higher_id = formula_id(req.strategy, req.branch, true);
    let blocks: Vec<Vec<Vec<String>>> = cells
        .par_iter()
        .map(|&(alpha, a1)| {
            let am = make_am_qubit(&QubitSpec::from_magnitude(0, 1, a1)?, req.branch, alpha)?;
            let base = match req.strategy {
                Strategy::Coherent => coherent_demodulate(&am)?,
                Strategy::Swap => swap_demodulate(&am)?,
            }
            .probability;
            check_probability(base)?;
            let mut rows = vec![vec![float(alpha), float(a1), float(base), base_id.clone()]];
            if req.higher_order {
                let h = higher_order(&am, req.strategy)?;
                check_probability(h)?;
                rows.push(vec![float(alpha), float(a1), float(h), higher_id.clone()]);
            }
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    Ok(blocks.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct TeleportRequest {
    pub k: usize,
    pub n: usize,
    pub a0: C64,
    pub a1: C64,
    pub alpha: f64,
    pub beta: f64,
    pub t: Option<f64>,
    pub floor: usize,
    pub m_max: usize,
}

pub struct TeleportReport {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    /// Human-readable table with totals and the diagonal check.
    pub text: String,
    /// Set when the amplitudes had to be rescaled.
    pub warning: Option<String>,
    pub total_probability: f64,
    /// Largest distance of Bob's unconditioned diagonal from `1/2`.
    pub diagonal_deviation: f64,
}

pub fn teleport(req: &TeleportRequest) -> Result<TeleportReport> {
    check_alpha(req.alpha)?;
    let norm = req.a0.norm_sqr() + req.a1.norm_sqr();
    let (qubit, warning) = match QubitSpec::new(req.k, req.n, req.a0, req.a1) {
        Ok(q) => (q, None),
        Err(dfock_core::Error::Unnormalized(_)) => (
            QubitSpec::normalizing(req.k, req.n, req.a0, req.a1)?,
            Some(format!("warning: qubit amplitudes had squared norm {norm}; normalized")),
        ),
        Err(e) => return Err(e.into()),
    };
    let ch = ChannelSpec::for_basis(req.beta, req.k, req.n)?;
    let run = run_ideal(&qubit, req.alpha, &ch, req.floor, req.m_max)?;
    let finite = match req.t {
        Some(t) => Some(run_finite(&qubit, req.alpha, t, req.floor, req.m_max)?),
        None => None,
    };

    // Bob's state averaged over every outcome Alice could report.
    let mut rho = [[C64::new(0.0, 0.0); 2]; 2];
    let mut assembled = 0.0;
    for r in &run.records {
        for (a, row) in rho.iter_mut().enumerate() {
            for (b, z) in row.iter_mut().enumerate() {
                *z += r.bob_raw[a] * r.bob_raw[b].conj() * r.probability;
            }
        }
        assembled += r.probability;
    }
    let diagonal_deviation = if assembled > 0.0 {
        (rho[0][0].re / assembled - 0.5).abs().max((rho[1][1].re / assembled - 0.5).abs())
    } else {
        f64::NAN
    };

    let mut header = vec!["j", "m", "probability", "fidelity"];
    if finite.is_some() {
        header.push("finite_fidelity");
    }
    let mut rows = Vec::new();
    let mut text = String::new();
    let _ = writeln!(
        text,
        "{:>2} {:>3} {:>24} {:>24}{}",
        "j",
        "m",
        "probability",
        "fidelity",
        if finite.is_some() { "   finite_fidelity" } else { "" }
    );
    for r in &run.records {
        let mut row = vec![r.j.to_string(), r.m.to_string(), float(r.probability), float(r.fidelity)];
        let _ = write!(text, "{:>2} {:>3} {:>24} {:>24}", r.j, r.m, float(r.probability), float(r.fidelity));
        if let Some(f) = &finite {
            let value = f.record(r.j, r.m).map_or(f64::NAN, |x| x.fidelity);
            row.push(float(value));
            let _ = write!(text, " {:>24}", float(value));
        }
        text.push('\n');
        rows.push(row);
    }
    let total = run.total_probability();
    let _ = writeln!(text, "sum of probabilities: {}", float(total));
    let _ = writeln!(text, "weight beyond m_max: {}", float(run.residual_probability));
    let _ = writeln!(text, "bob diagonal deviation from 1/2: {}", float(diagonal_deviation));
    if let Some(f) = &finite {
        let _ = writeln!(text, "channel amplitude at t: {}", float(f.beta));
        let _ = writeln!(text, "four-mode state fidelity at t: {}", float(f.state_fidelity));
    }
    Ok(TeleportReport { header, rows, text, warning, total_probability: total, diagonal_deviation })
}

pub const ENTROPY_HEADER: [&str; 3] = ["beta", "phi", "entropy_bits"];

/// Entanglement of the dual rail with the coherent mode, in bits.
pub fn channel_entropy(betas: &[f64], phi: f64, floor: usize) -> Result<Vec<Vec<String>>> {
    if betas.is_empty() {
        return Err(usage("at least one --beta is required"));
    }
    betas
        .par_iter()
        .map(|&beta| {
            let ch = ChannelSpec::new(beta, phi)?;
            let tr = Truncation::adaptive(beta, floor);
            let state = build_hybrid_channel(&ch, tr)?;
            let s = partial_trace(&state, &[1, 2])?.entropy_bits();
            Ok(vec![float(beta), float(phi), float(s)])
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_at_zero() {
        let rows = matrix_elements(C64::new(0.0, 0.0), 3, 3);
        for r in rows {
            assert_eq!(r.re, if r.l == r.n { 1.0 } else { 0.0 });
            assert_eq!(r.im, 0.0);
        }
    }

    #[test]
    fn first_row_is_power_series() {
        let rows = matrix_elements(C64::new(0.2, 0.0), 0, 6);
        let mut fact = 1.0;
        for r in rows {
            if r.n > 0 {
                fact *= r.n as f64;
            }
            assert!((r.re - 0.2f64.powi(r.n as i32) / fact.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn ids() {
        assert_eq!(formula_id(Strategy::Swap, AmBranch::K, false), "P_t1^s");
        assert_eq!(formula_id(Strategy::Coherent, AmBranch::N, true), "P_t2^c_m2");
    }

    #[test]
    fn vacuum_amplitude_teleports_cleanly() {
        let req = TeleportRequest {
            k: 0,
            n: 1,
            a0: C64::new(1.0, 0.0),
            a1: C64::new(0.0, 0.0),
            alpha: 0.2,
            beta: 0.8,
            t: None,
            floor: 25,
            m_max: 12,
        };
        let rep = teleport(&req).unwrap();
        assert!((rep.total_probability - 1.0).abs() < 1e-9);
        assert!(rep.diagonal_deviation < 1e-9);
        assert!(rep.warning.is_none());
    }
}
