//! Closed-form link physics: MRT precoding, SNR, rate, received and harvested
//! power, the contribution indicator, and the SNR upper bound used for
//! coverage-group sizing.
//!
//! Everything here is a pure function over read-only channel data; powers are
//! in watts throughout (dBm conversion is a CLI concern).

use crate::error::Error;
use crate::math::{axpy, norm, norm_sq, CMat, C64};
use crate::model::Preset;
use crate::Result;

/// Per-(surface, UE) response vector: unit-modulus phases masked by the
/// preset so only reflecting elements respond.
#[derive(Debug, Clone)]
pub struct SurfaceResponse {
    /// Masked response `phi = diag(varphi) * beta`.
    pub phi: Vec<C64>,
    /// Unit-modulus phase vector.
    pub varphi: Vec<C64>,
}

impl SurfaceResponse {
    /// Masks a unit-modulus phase vector with a preset. Phases are normalized
    /// onto the unit circle; zero entries default to phase 0.
    pub fn new(varphi: Vec<C64>, preset: &Preset) -> Self {
        assert_eq!(varphi.len(), preset.n_elem(), "response length != n_elem");
        let varphi: Vec<C64> = varphi
            .into_iter()
            .map(|v| {
                if v.norm() == 0.0 {
                    C64::new(1.0, 0.0)
                } else {
                    v / v.norm()
                }
            })
            .collect();
        let phi = varphi
            .iter()
            .zip(&preset.beta)
            .map(|(&v, &b)| if b { v } else { C64::new(0.0, 0.0) })
            .collect();
        Self { phi, varphi }
    }

    /// All-zero phases (phase 0 on reflecting elements).
    pub fn flat(preset: &Preset) -> Self {
        Self::new(vec![C64::new(1.0, 0.0); preset.n_elem()], preset)
    }
}

/// Effective downlink channel `h + sum_l H_l phi_l`.
pub fn effective_channel(h: &[C64], contributions: &[(&CMat, &[C64])]) -> Vec<C64> {
    let mut v = h.to_vec();
    for (hmat, phi) in contributions {
        let add = hmat.matvec(phi);
        axpy(&mut v, C64::new(1.0, 0.0), &add);
    }
    v
}

/// Maximum ratio transmission precoder for the effective channel; unit norm.
pub fn mrt_precoder(h: &[C64], contributions: &[(&CMat, &[C64])]) -> Result<Vec<C64>> {
    let v = effective_channel(h, contributions);
    let nrm = norm(&v);
    if nrm == 0.0 {
        return Err(Error::Unreachable(
            "zero effective channel: MRT undefined".into(),
        ));
    }
    Ok(v.iter().map(|x| x.conj() / nrm).collect())
}

/// SNR of the MRT-precoded link: `||h + sum H phi||^2 * P / (B N0)`.
pub fn snr(h: &[C64], contributions: &[(&CMat, &[C64])], p: f64, b: f64, n0: f64) -> f64 {
    let v = effective_channel(h, contributions);
    norm_sq(&v) * p / (b * n0)
}

/// Achievable rate `tau * B * log2(1 + gamma)` in bit/s.
pub fn rate(tau: f64, b: f64, gamma: f64) -> f64 {
    tau * b * (1.0 + gamma).log2()
}

/// Power collected by the harvesting elements of one surface under precoder
/// `w`: `sum_m (1-beta_m) |g_m^T w|^2 P`. Thermal noise pickup is neglected.
pub fn received_power(g_mat: &CMat, preset: &Preset, w: &[C64], p: f64) -> f64 {
    assert_eq!(g_mat.cols, w.len(), "precoder length != BS antennas");
    assert_eq!(g_mat.rows, preset.n_elem(), "preset length != surface rows");
    let mut acc = 0.0;
    for (m, &beta) in preset.beta.iter().enumerate() {
        if beta {
            continue;
        }
        let row = g_mat.row(m);
        let mut s = C64::new(0.0, 0.0);
        for (a, b) in row.iter().zip(w) {
            s += a * b; // plain transpose product, no conjugation
        }
        acc += s.norm_sqr() * p;
    }
    acc
}

/// Nonlinear rectifier model `q1 p / (q2 p + q3)`; strictly increasing with
/// supremum `q1/q2`.
pub fn harvested_power(p_rc: f64, q1: f64, q2: f64, q3: f64) -> Result<f64> {
    if p_rc < 0.0 {
        return Err(Error::Config(format!("negative received power {p_rc}")));
    }
    Ok(q1 * p_rc / (q2 * p_rc + q3))
}

/// Direct-only SNR `||h||^2 P / (B N0)`.
pub fn snr_bs_only(h: &[C64], p: f64, b: f64, n0: f64) -> f64 {
    norm_sq(h) * p / (b * n0)
}

/// Contribution indicator `eta = Gamma_BS / Gamma`; near 1 means the surfaces
/// barely help. Undefined for UEs with zero assisted SNR.
pub fn contribution_eta(h: &[C64], gamma: f64, p: f64, b: f64, n0: f64) -> Result<f64> {
    if gamma <= 0.0 {
        return Err(Error::Unreachable(
            "eta undefined for zero assisted SNR".into(),
        ));
    }
    Ok(snr_bs_only(h, p, b, n0) / gamma)
}

/// Sound SNR upper bound over all responses with entries in the unit disk:
/// `(||h|| + sum_m ||H[:,m]||)^2 * P / (B N0)` by the triangle inequality
/// applied column by column.
pub fn snr_upper_bound(h: &[C64], h_stacked: &CMat, p: f64, b: f64, n0: f64) -> f64 {
    let col_sum: f64 = (0..h_stacked.cols).map(|c| h_stacked.col_norm(c)).sum();
    let amp = norm(h) + col_sum;
    amp * amp * p / (b * n0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::cdot;
    use crate::model::build_preset;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn rand_c(rng: &mut StdRng) -> C64 {
        c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    }

    fn rand_phase(rng: &mut StdRng) -> C64 {
        C64::from_polar(1.0, rng.gen::<f64>() * std::f64::consts::TAU)
    }

    #[test]
    fn mrt_basis_vector() {
        let h = vec![c(1.0, 0.0), c(0.0, 0.0)];
        let w = mrt_precoder(&h, &[]).unwrap();
        assert!((w[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(w[1].norm() < 1e-15);
    }

    #[test]
    fn mrt_conjugates_and_normalizes() {
        let h = vec![c(1.0, 0.0), c(0.0, 1.0)];
        let w = mrt_precoder(&h, &[]).unwrap();
        let s = 1.0 / 2.0f64.sqrt();
        assert!((w[0] - c(s, 0.0)).norm() < 1e-12);
        assert!((w[1] - c(0.0, -s)).norm() < 1e-12);
    }

    #[test]
    fn mrt_unit_norm_on_random_inputs() {
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..200 {
            let h: Vec<C64> = (0..4).map(|_| rand_c(&mut rng)).collect();
            let hm = CMat::from_rows(vec![
                (0..2).map(|_| rand_c(&mut rng)).collect(),
                (0..2).map(|_| rand_c(&mut rng)).collect(),
                (0..2).map(|_| rand_c(&mut rng)).collect(),
                (0..2).map(|_| rand_c(&mut rng)).collect(),
            ]);
            let phi: Vec<C64> = (0..2).map(|_| rand_phase(&mut rng)).collect();
            let w = mrt_precoder(&h, &[(&hm, &phi)]).unwrap();
            assert!((norm(&w) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mrt_zero_channel_errors() {
        let h = vec![c(0.0, 0.0); 3];
        assert!(mrt_precoder(&h, &[]).is_err());
    }

    #[test]
    fn snr_examples() {
        let h = vec![c(1.0, 0.0), c(0.0, 0.0)];
        assert!((snr(&h, &[], 1.0, 1.0, 1.0) - 1.0).abs() < 1e-15);

        let hz = vec![c(0.0, 0.0); 2];
        assert_eq!(snr(&hz, &[], 1.0, 1.0, 1.0), 0.0);

        // N=1, surface contributes exactly +1
        let h1 = vec![c(1.0, 0.0)];
        let hm = CMat::from_rows(vec![vec![c(1.0, 0.0)]]);
        let phi = vec![c(1.0, 0.0)];
        let p = 2.5;
        let bn0 = 0.7;
        let got = snr(&h1, &[(&hm, &phi)], p, 1.0, bn0);
        assert!((got - 4.0 * p / bn0).abs() < 1e-12);
    }

    #[test]
    fn rate_examples() {
        assert!((rate(0.5, 1.0, 3.0) - 1.0).abs() < 1e-15);
        assert_eq!(rate(0.3, 1e9, 0.0), 0.0);
        assert!((rate(1.0, 1e9, 1.0) - 1e9).abs() < 1e-3);
    }

    #[test]
    fn received_power_examples() {
        // all-reflecting preset harvests nothing
        let g = CMat::from_rows(vec![vec![c(0.3, 0.1)], vec![c(0.2, -0.4)]]);
        let w = vec![c(1.0, 0.0)];
        let full = build_preset(4, 4).unwrap();
        let g4 = CMat::from_rows(vec![
            vec![c(0.3, 0.1)],
            vec![c(0.2, -0.4)],
            vec![c(0.1, 0.0)],
            vec![c(0.0, 0.2)],
        ]);
        assert_eq!(received_power(&g4, &full, &w, 1.0), 0.0);

        // zero channel harvests nothing
        let mixed = build_preset(4, 1).unwrap();
        let gz = CMat::zeros(4, 1);
        assert_eq!(received_power(&gz, &mixed, &w, 1.0), 0.0);

        // M=1, N=1, harvesting element with |g|=0.01
        let p1 = Preset {
            beta: vec![false],
            m_bar: 0,
        };
        let g1 = CMat::from_rows(vec![vec![c(0.01, 0.0)]]);
        let got = received_power(&g1, &p1, &w, 1.0);
        assert!((got - 1.0e-4).abs() < 1e-18);
        drop(g);
    }

    #[test]
    fn harvested_power_examples() {
        let (q1, q2, q3) = (0.3904, 0.8260, 0.6823);
        assert_eq!(harvested_power(0.0, q1, q2, q3).unwrap(), 0.0);
        // supremum q1/q2
        let sup = q1 / q2;
        assert!((sup - 0.472639).abs() < 1e-6);
        let big = harvested_power(1e12, q1, q2, q3).unwrap();
        assert!(big < sup && sup - big < 1e-9);
        // 1 W input
        let one = harvested_power(1.0, q1, q2, q3).unwrap();
        assert!((one - 0.3904 / 1.5083).abs() < 1e-12);
        assert!((one - 0.258835).abs() < 1e-6);
        assert!(harvested_power(-1e-9, q1, q2, q3).is_err());
    }

    #[test]
    fn harvested_power_is_monotone_and_bounded() {
        let (q1, q2, q3) = (0.3904, 0.8260, 0.6823);
        let mut prev = -1.0;
        for i in 0..1000 {
            // log grid from 1e-9 W to 1e3 W
            let p = 1e-9 * 10f64.powf(12.0 * i as f64 / 999.0);
            let h = harvested_power(p, q1, q2, q3).unwrap();
            assert!(h > prev, "not strictly increasing at p={p}");
            assert!(h >= 0.0 && h < q1 / q2);
            prev = h;
        }
    }

    #[test]
    fn eta_examples() {
        let h = vec![c(1.0, 0.0), c(0.0, 0.0)];
        let g = snr(&h, &[], 1.0, 1.0, 1.0);
        assert!((contribution_eta(&h, g, 1.0, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-12);

        // blocked UE served by surfaces only: eta = 0
        let hz = vec![c(0.0, 0.0); 2];
        assert_eq!(contribution_eta(&hz, 4.0, 1.0, 1.0, 1.0).unwrap(), 0.0);

        // ||h||^2 = 1, assisted 4 -> 0.25
        assert!((contribution_eta(&h, 4.0, 1.0, 1.0, 1.0).unwrap() - 0.25).abs() < 1e-12);

        assert!(contribution_eta(&h, 0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn snr_upper_bound_examples() {
        let h = vec![c(1.0, 0.0), c(1.0, 0.0)];
        let zero = CMat::zeros(2, 3);
        let ub = snr_upper_bound(&h, &zero, 2.0, 1.0, 1.0);
        assert!((ub - snr_bs_only(&h, 2.0, 1.0, 1.0)).abs() < 1e-12);

        // h = 0, single nonzero column of norm 2 -> bound 4
        let hz = vec![c(0.0, 0.0); 2];
        let mut hm = CMat::zeros(2, 2);
        hm.set(0, 0, c(2.0, 0.0));
        let ub2 = snr_upper_bound(&hz, &hm, 1.0, 1.0, 1.0);
        assert!((ub2 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn snr_never_exceeds_upper_bound_on_random_draws() {
        let mut rng = StdRng::seed_from_u64(11);
        let n = 3;
        let m = 4;
        for _ in 0..10 {
            let h: Vec<C64> = (0..n).map(|_| rand_c(&mut rng)).collect();
            let hm = CMat::from_rows(
                (0..n)
                    .map(|_| (0..m).map(|_| rand_c(&mut rng)).collect())
                    .collect(),
            );
            let ub = snr_upper_bound(&h, &hm, 1.0, 1.0, 1.0);
            for _ in 0..1000 {
                let phi: Vec<C64> = (0..m).map(|_| rand_phase(&mut rng)).collect();
                let g = snr(&h, &[(&hm, &phi)], 1.0, 1.0, 1.0);
                assert!(g <= ub * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn surface_response_masks_and_normalizes() {
        let preset = build_preset(4, 1).unwrap();
        let r = SurfaceResponse::new(
            vec![c(3.0, 4.0), c(0.0, 2.0), c(1.0, 0.0), c(0.0, 0.0)],
            &preset,
        );
        assert!((r.phi[0].norm() - 1.0).abs() < 1e-15);
        for m in preset.harvest_idx() {
            assert_eq!(r.phi[m].norm(), 0.0);
        }
        for v in &r.varphi {
            assert!((v.norm() - 1.0).abs() < 1e-15);
        }
        // masked response has exactly m_bar nonzero entries
        assert!((cdot(&r.phi, &r.phi).re - 1.0).abs() < 1e-15);
    }
}
