//! Deterministic channel synthesis and the channel file format.
//!
//! Synthesis sums free-space element-pair terms (no far-field shortcut: at
//! 28 GHz the surface-UE spans are only a few wavelengths), which is the same
//! shape of output a ray tracer would produce for the line-of-sight paths.
//! Externally traced channels can be imported through [`import`].

use crate::error::Error;
use crate::math::{CMat, Vec3, C64};
use crate::model::{Geometry, ScenarioConfig};
use crate::Result;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::Path;

/// Peak power gain of the cosine element pattern (directivity of G(θ)=4cosθ).
const COSINE_PATTERN_PEAK: f64 = 4.0;

/// The deterministic channels of a scenario.
///
/// `g_bs_ssm[l]` is the M x N matrix from the BS to surface `l` (row m is the
/// channel from all BS antennas to element m); `g_ssm_ue[l][k]` is the
/// length-M vector from surface `l` to UE `k`; `h[k]` is the length-N direct
/// channel. Cascaded matrices are derived on demand via [`ChannelSet::cascaded`].
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    pub n_bs: usize,
    pub n_elem: usize,
    pub h: Vec<Vec<C64>>,
    pub g_bs_ssm: Vec<CMat>,
    pub g_ssm_ue: Vec<Vec<Vec<C64>>>,
}

impl ChannelSet {
    pub fn n_ues(&self) -> usize {
        self.h.len()
    }

    pub fn n_ssms(&self) -> usize {
        self.g_bs_ssm.len()
    }

    /// Cascaded BS→surface→UE matrix `G_l^T diag(g_{l,k})`, N x M.
    pub fn cascaded(&self, l: usize, k: usize) -> CMat {
        cascade(&self.g_bs_ssm[l], &self.g_ssm_ue[l][k])
    }
}

/// `G^T diag(g)`: N x M cascade of an M x N forward matrix with an M-vector.
pub fn cascade(g_mat: &CMat, g_vec: &[C64]) -> CMat {
    assert_eq!(
        g_mat.rows,
        g_vec.len(),
        "cascade: G rows {} != g length {}",
        g_mat.rows,
        g_vec.len()
    );
    let n = g_mat.cols;
    let m = g_mat.rows;
    let mut out = CMat::zeros(n, m);
    for mi in 0..m {
        let scale = g_vec[mi];
        for ni in 0..n {
            out.set(ni, mi, g_mat.get(mi, ni) * scale);
        }
    }
    out
}

/// Free-space scalar between two elements with given power gains.
fn pair_coeff(a: Vec3, b: Vec3, gain_a: f64, gain_b: f64, lambda: f64) -> Result<C64> {
    let d = a.dist(b);
    if d == 0.0 {
        return Err(Error::Config(
            "coincident element positions (zero distance)".into(),
        ));
    }
    if gain_a <= 0.0 || gain_b <= 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let amp = (gain_a * gain_b).sqrt() * lambda / (4.0 * PI * d);
    let phase = -2.0 * PI * d / lambda;
    Ok(C64::from_polar(amp, phase))
}

/// Cosine power pattern of a surface element: `4 cos θ` on the reflective
/// side, zero behind the substrate.
fn element_gain(elem: Vec3, normal: Vec3, other: Vec3) -> f64 {
    let dir = other.sub(elem);
    let d = dir.norm();
    if d == 0.0 {
        return COSINE_PATTERN_PEAK;
    }
    let cos_theta = dir.dot(normal) / d;
    if cos_theta <= 0.0 {
        0.0
    } else {
        COSINE_PATTERN_PEAK * cos_theta
    }
}

/// Synthesizes all channels for the geometry: single-bounce LoS terms with
/// isotropic BS/UE elements and cosine-pattern surface elements.
pub fn synthesize(geom: &Geometry, cfg: &ScenarioConfig) -> Result<ChannelSet> {
    let lambda = cfg.wavelength();
    let n = geom.bs_elements.len();
    let k_tot = geom.n_ues();

    // Direct BS->UE channels; zero when blocked.
    let mut h = Vec::with_capacity(k_tot);
    for k in 0..k_tot {
        if geom.direct_blocked[k] {
            h.push(vec![C64::new(0.0, 0.0); n]);
        } else {
            let ue = geom.ue_positions[k];
            let mut v = Vec::with_capacity(n);
            for &b in &geom.bs_elements {
                v.push(pair_coeff(b, ue, 1.0, 1.0, lambda)?);
            }
            h.push(v);
        }
    }

    // BS->surface and surface->UE, parallel over panels.
    let per_panel: Vec<Result<(CMat, Vec<Vec<C64>>)>> = geom
        .ssm
        .par_iter()
        .map(|panel| {
            let m = panel.elements.len();
            let mut gmat = CMat::zeros(m, n);
            for (mi, &e) in panel.elements.iter().enumerate() {
                for (ni, &b) in geom.bs_elements.iter().enumerate() {
                    let ga = element_gain(e, panel.normal, b);
                    gmat.set(mi, ni, pair_coeff(e, b, ga, 1.0, lambda)?);
                }
            }
            let mut gvecs = Vec::with_capacity(k_tot);
            for k in 0..k_tot {
                let row_gap =
                    (panel.row as isize - geom.ue_row[k] as isize).unsigned_abs();
                if cfg.ssm_ue_cutoff && row_gap > cfg.blockage_row_radius {
                    gvecs.push(vec![C64::new(0.0, 0.0); m]);
                    continue;
                }
                let ue = geom.ue_positions[k];
                let mut v = Vec::with_capacity(m);
                for &e in &panel.elements {
                    let ga = element_gain(e, panel.normal, ue);
                    v.push(pair_coeff(e, ue, ga, 1.0, lambda)?);
                }
                gvecs.push(v);
            }
            Ok((gmat, gvecs))
        })
        .collect();

    let mut g_bs_ssm = Vec::with_capacity(geom.n_ssms());
    let mut g_ssm_ue = Vec::with_capacity(geom.n_ssms());
    for r in per_panel {
        let (gmat, gvecs) = r?;
        g_bs_ssm.push(gmat);
        g_ssm_ue.push(gvecs);
    }

    Ok(ChannelSet {
        n_bs: n,
        n_elem: cfg.n_elem,
        h,
        g_bs_ssm,
        g_ssm_ue,
    })
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    magic: String,
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "M")]
    m: usize,
    #[serde(rename = "L")]
    l: usize,
    #[serde(rename = "K")]
    k: usize,
    layout: String,
    scalar: String,
}

const MAGIC: &str = "SSMCH1";

fn push_complex(buf: &mut Vec<u8>, v: C64) {
    buf.extend_from_slice(&v.re.to_le_bytes());
    buf.extend_from_slice(&v.im.to_le_bytes());
}

/// Writes a channel set: one JSON manifest line followed by the raw
/// little-endian f64 blob (h, then G per surface, then g per surface per UE).
pub fn export(cs: &ChannelSet, path: &Path) -> Result<()> {
    let manifest = Manifest {
        magic: MAGIC.into(),
        n: cs.n_bs,
        m: cs.n_elem,
        l: cs.n_ssms(),
        k: cs.n_ues(),
        layout: "row-major".into(),
        scalar: "f64-re-im-interleaved".into(),
    };
    let mut out = serde_json::to_vec(&manifest)?;
    out.push(b'\n');
    for hk in &cs.h {
        for &v in hk {
            push_complex(&mut out, v);
        }
    }
    for g in &cs.g_bs_ssm {
        for &v in &g.data {
            push_complex(&mut out, v);
        }
    }
    for per_ue in &cs.g_ssm_ue {
        for gv in per_ue {
            for &v in gv {
                push_complex(&mut out, v);
            }
        }
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(&out)?;
    Ok(())
}

/// Reads a channel set written by [`export`], validating the manifest and the
/// blob length.
pub fn import(path: &Path) -> Result<ChannelSet> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::ChannelFile("missing manifest line".into()))?;
    let manifest: Manifest = serde_json::from_slice(&bytes[..nl])
        .map_err(|e| Error::ChannelFile(format!("bad manifest: {e}")))?;
    if manifest.magic != MAGIC {
        return Err(Error::ChannelFile(format!(
            "bad magic {:?}, expected {MAGIC:?}",
            manifest.magic
        )));
    }
    if manifest.layout != "row-major" || manifest.scalar != "f64-re-im-interleaved" {
        return Err(Error::ChannelFile("unsupported layout or scalar".into()));
    }
    let (n, m, l, k) = (manifest.n, manifest.m, manifest.l, manifest.k);
    let n_scalars = k * n + l * m * n + l * k * m;
    let blob = &bytes[nl + 1..];
    if blob.len() != n_scalars * 16 {
        return Err(Error::ChannelFile(format!(
            "blob holds {} bytes, manifest implies {}",
            blob.len(),
            n_scalars * 16
        )));
    }
    let mut cursor = 0usize;
    let mut next = || {
        let re = f64::from_le_bytes(blob[cursor..cursor + 8].try_into().unwrap());
        let im = f64::from_le_bytes(blob[cursor + 8..cursor + 16].try_into().unwrap());
        cursor += 16;
        C64::new(re, im)
    };
    let mut h = Vec::with_capacity(k);
    for _ in 0..k {
        h.push((0..n).map(|_| next()).collect());
    }
    let mut g_bs_ssm = Vec::with_capacity(l);
    for _ in 0..l {
        let mut mat = CMat::zeros(m, n);
        for i in 0..m * n {
            mat.data[i] = next();
        }
        g_bs_ssm.push(mat);
    }
    let mut g_ssm_ue = Vec::with_capacity(l);
    for _ in 0..l {
        let mut per_ue = Vec::with_capacity(k);
        for _ in 0..k {
            per_ue.push((0..m).map(|_| next()).collect());
        }
        g_ssm_ue.push(per_ue);
    }
    Ok(ChannelSet {
        n_bs: n,
        n_elem: m,
        h,
        g_bs_ssm,
        g_ssm_ue,
    })
}
