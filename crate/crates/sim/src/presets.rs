//! Named experiment sets for the rate-matched comparisons: 16-QAM
//! ACO-OFDM against OOK HCM at `N = 128`, one bit per chip, `P0 = 0.5` W.

use hcm_core::interleaver_opt::optimize_interleaver;
use hcm_core::link::Scheme;

use crate::config::parse_grid;
use crate::sweep::{StopRule, SweepSpec, DEFAULT_P0, DEFAULT_SEED};

pub const N: usize = 128;
pub const DISPERSIVE_TAPS: [f64; 2] = [0.9, 0.1];
pub const DISPERSIVE_CP: usize = 4;
pub const ANNEAL_BUDGET: usize = 100_000;
pub const ANNEAL_SEED: u64 = 1;

/// HCM grids run past `P0 / 2`; ACO-OFDM cannot reach an average of
/// `P0 / 2` under the limiter, so its grid stops just short.
pub const FIG6_HCM_GRID: &str = "0:30:0.5";
pub const FIG6_ACO_GRID: &str = "0:23.5:0.5";
pub const FIG7_HCM_GRID: &str = "10:30:0.5";
pub const FIG7_ACO_GRID: &str = "10:23.5:0.5";

#[derive(Debug, Clone, PartialEq)]
pub struct NamedSpec {
    pub name: String,
    pub spec: SweepSpec,
}

fn base(scheme: Scheme, noise_dbm: f64, grid: &str) -> SweepSpec {
    SweepSpec {
        scheme,
        n: N,
        m: if scheme == Scheme::AcoOfdm { 16 } else { 2 },
        cp_len: 0,
        taps: vec![1.0],
        noise_dbm: Some(noise_dbm),
        p0: DEFAULT_P0,
        powers_dbm: parse_grid(grid).expect("static grid"),
        stop: StopRule::default(),
        base_seed: DEFAULT_SEED,
        interleaver: None,
    }
}

/// Ideal channel, noise at -30 and -20 dBm: HCM, DC-removed HCM and
/// ACO-OFDM.
pub fn fig6() -> Vec<NamedSpec> {
    let mut out = Vec::new();
    for noise in [-30.0, -20.0] {
        for (scheme, grid) in [
            (Scheme::Hcm, FIG6_HCM_GRID),
            (Scheme::DcrHcm, FIG6_HCM_GRID),
            (Scheme::AcoOfdm, FIG6_ACO_GRID),
        ] {
            out.push(NamedSpec {
                name: format!("fig6-{}-noise{}", scheme.name(), noise),
                spec: base(scheme, noise, grid),
            });
        }
    }
    out
}

/// Dispersive channel `h = [0.9, 0.1]` with a 4-chip prefix at -20 dBm:
/// HCM, annealed interleaved HCM and ACO-OFDM, plus an ideal-channel HCM
/// reference.
pub fn fig7() -> Vec<NamedSpec> {
    let perm = optimize_interleaver(&DISPERSIVE_TAPS, N, ANNEAL_BUDGET, ANNEAL_SEED)
        .expect("valid preset")
        .interleaver
        .into_perm();
    let dispersive = |scheme, grid| {
        let mut s = base(scheme, -20.0, grid);
        s.taps = DISPERSIVE_TAPS.to_vec();
        s.cp_len = DISPERSIVE_CP;
        s
    };
    let mut interleaved = dispersive(Scheme::InterleavedHcm, FIG7_HCM_GRID);
    interleaved.interleaver = Some(perm);
    let mut ideal = dispersive(Scheme::Hcm, FIG7_HCM_GRID);
    ideal.taps = vec![1.0];
    vec![
        NamedSpec {
            name: "fig7-hcm".into(),
            spec: dispersive(Scheme::Hcm, FIG7_HCM_GRID),
        },
        NamedSpec {
            name: "fig7-interleaved-hcm".into(),
            spec: interleaved,
        },
        NamedSpec {
            name: "fig7-aco-ofdm".into(),
            spec: dispersive(Scheme::AcoOfdm, FIG7_ACO_GRID),
        },
        NamedSpec {
            name: "fig7-hcm-ideal".into(),
            spec: ideal,
        },
    ]
}

pub fn by_name(name: &str) -> Option<Vec<NamedSpec>> {
    match name {
        "fig6" => Some(fig6()),
        "fig7" => Some(fig7()),
        _ => None,
    }
}
