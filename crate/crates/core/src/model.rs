//! Scenario configuration, cabin geometry, surface presets, and coverage
//! groups.
//!
//! The modeled venue is an aircraft-style cabin: `rows` seat rows of six
//! seats, a base station (BS) array mounted under the ceiling over the middle
//! row, and two metasurfaces per row above the window-side middle seats with
//! their reflective faces turned toward the BS.

use crate::error::Error;
use crate::math::Vec3;
use crate::Result;
use serde::{Deserialize, Serialize};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Seats per row (3 + aisle + 3).
pub const SEATS_PER_ROW: usize = 6;

/// Surfaces per row (one on each side of the aisle).
pub const SSMS_PER_ROW: usize = 2;

/// Lateral seat positions in meters relative to the aisle center.
const SEAT_Y: [f64; SEATS_PER_ROW] = [-1.6, -1.1, -0.6, 0.6, 1.1, 1.6];

/// Lateral positions of the two surfaces (above the middle seats).
const SSM_Y: [f64; SSMS_PER_ROW] = [-1.1, 1.1];

/// Surface mounting offset along the row axis, as a fraction of the seat
/// pitch, away from the BS. A panel exactly in its row's seat plane would see
/// same-row UEs at 90 degrees where the cosine element pattern vanishes.
const SSM_ROW_OFFSET: f64 = 0.4;

fn is_perfect_square(n: usize) -> bool {
    let r = (n as f64).sqrt().round() as usize;
    r * r == n
}

fn isqrt(n: usize) -> usize {
    (n as f64).sqrt().round() as usize
}

/// All physical and algorithmic constants of a scenario.
///
/// Serialized as a flat JSON document; every field has a default so partial
/// configs stay valid.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Carrier frequency in Hz.
    pub carrier_freq: f64,
    /// Communication bandwidth B in Hz.
    pub bandwidth: f64,
    /// Noise power spectral density N0 in W/Hz.
    pub noise_psd: f64,
    /// Transmit power P in W.
    pub tx_power: f64,
    /// Number of BS antennas N (perfect square).
    pub n_bs: usize,
    /// Number of elements per metasurface M (perfect square).
    pub n_elem: usize,
    /// BS antenna spacing in wavelengths.
    pub bs_spacing: f64,
    /// Metasurface element spacing in wavelengths.
    pub ms_spacing: f64,
    /// Power drawn by one reflecting element, in W.
    pub p_reflect: f64,
    /// Harvest model numerator coefficient.
    pub q1: f64,
    /// Harvest model denominator slope (dimensionless).
    pub q2: f64,
    /// Harvest model denominator offset, in W.
    pub q3: f64,
    /// Minimum allocable time fraction, in (0,1).
    pub tau_min: f64,
    /// SCA iteration rounds E.
    pub sca_rounds: usize,
    /// Penalty weight on the rate-cut slack.
    pub penalty_rate_cut: f64,
    /// Penalty weight on the per-element harvest-cut slacks.
    pub penalty_harvest_cut: f64,
    /// Penalty weight on the CCP harvest-cone slacks.
    pub penalty_ccp: f64,
    /// Number of seat rows in the cabin.
    pub rows: usize,
    /// Rows of surfaces grouped with each UE row.
    pub ssm_rows_per_group: usize,
    /// Candidate reflecting-area sizes (perfect squares <= n_elem).
    pub candidate_sizes: Vec<usize>,
    /// Direct links farther than this many rows from the BS row are blocked.
    pub blockage_row_radius: usize,
    /// Monte-Carlo rounds for the preset search.
    pub mc_draws: usize,
    /// Seat pitch along the cabin axis, in m.
    pub seat_pitch: f64,
    /// Ceiling (BS mounting) height, in m.
    pub ceiling_height: f64,
    /// UE height, in m.
    pub seat_height: f64,
    /// Surface center height, in m.
    pub ssm_height: f64,
    /// Zero out surface-to-UE links farther than `blockage_row_radius` rows.
    pub ssm_ue_cutoff: bool,
    /// Optional per-UE blockage override (length rows*6); replaces the
    /// row-distance heuristic when present.
    pub ue_blockage_override: Option<Vec<bool>>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            carrier_freq: 28.0e9,
            bandwidth: 1.0e9,
            noise_psd: 3.9810717055349695e-21, // -174 dBm/Hz
            tx_power: 1.0,                     // 30 dBm
            n_bs: 64,
            n_elem: 1024,
            bs_spacing: 0.5,
            ms_spacing: 0.25,
            p_reflect: 2.0e-6,
            q1: 0.3904,
            q2: 0.8260,
            q3: 0.6823,
            tau_min: 1.0e-3,
            sca_rounds: 5,
            penalty_rate_cut: 100.0,
            penalty_harvest_cut: 1.0e7,
            penalty_ccp: 1.0e7,
            rows: 31,
            ssm_rows_per_group: 2,
            candidate_sizes: vec![16, 64, 81, 121, 144, 169, 225, 256],
            blockage_row_radius: 3,
            mc_draws: 10,
            seat_pitch: 0.8,
            ceiling_height: 2.2,
            seat_height: 1.2,
            ssm_height: 2.0,
            ssm_ue_cutoff: true,
            ue_blockage_override: None,
        }
    }
}

impl ScenarioConfig {
    /// Carrier wavelength in m.
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_freq
    }

    /// Noise power B*N0 in W.
    pub fn noise_power(&self) -> f64 {
        self.bandwidth * self.noise_psd
    }

    /// Index of the BS row (1-based, middle of the cabin).
    pub fn bs_row(&self) -> usize {
        (self.rows + 1) / 2
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows < 1 {
            return Err(Error::Config("rows must be >= 1".into()));
        }
        if !is_perfect_square(self.n_bs) || self.n_bs == 0 {
            return Err(Error::Config(format!(
                "n_bs must be a positive perfect square, got {}",
                self.n_bs
            )));
        }
        if !is_perfect_square(self.n_elem) || self.n_elem == 0 {
            return Err(Error::Config(format!(
                "n_elem must be a positive perfect square, got {}",
                self.n_elem
            )));
        }
        if !(self.tau_min > 0.0 && self.tau_min < 1.0) {
            return Err(Error::Config("tau_min must lie in (0,1)".into()));
        }
        for &v in &[
            self.carrier_freq,
            self.bandwidth,
            self.noise_psd,
            self.tx_power,
            self.q1,
            self.q2,
            self.q3,
        ] {
            if !(v > 0.0) {
                return Err(Error::Config(
                    "frequencies, powers, and harvest coefficients must be > 0".into(),
                ));
            }
        }
        if self.p_reflect < 0.0 {
            return Err(Error::Config("p_reflect must be >= 0".into()));
        }
        for &s in &self.candidate_sizes {
            if s > self.n_elem || !is_perfect_square(s) || s == 0 {
                return Err(Error::Config(format!(
                    "candidate size {s} must be a perfect square <= n_elem"
                )));
            }
        }
        if self.ssm_rows_per_group == 0 {
            return Err(Error::Config("ssm_rows_per_group must be >= 1".into()));
        }
        if let Some(o) = &self.ue_blockage_override {
            if o.len() != self.rows * SEATS_PER_ROW {
                return Err(Error::Config(format!(
                    "ue_blockage_override length {} != {} UEs",
                    o.len(),
                    self.rows * SEATS_PER_ROW
                )));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("bad config json: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// One metasurface panel: element positions plus the reflective-side normal.
#[derive(Debug, Clone)]
pub struct SsmPanel {
    /// Panel center.
    pub center: Vec3,
    /// Element positions, grid order `m = grid_row*sqrt(M) + grid_col`
    /// (grid rows run upward, grid columns run along +y).
    pub elements: Vec<Vec3>,
    /// Unit normal of the reflective side (points toward the BS).
    pub normal: Vec3,
    /// 1-based cabin row of the panel.
    pub row: usize,
}

/// Static geometry of the scenario.
#[derive(Debug, Clone)]
pub struct Geometry {
    /// BS antenna element positions.
    pub bs_elements: Vec<Vec3>,
    /// BS array center.
    pub bs_center: Vec3,
    /// 1-based BS row.
    pub bs_row: usize,
    /// Surface panels, two per row.
    pub ssm: Vec<SsmPanel>,
    /// UE positions, one per seat, row-major.
    pub ue_positions: Vec<Vec3>,
    /// 1-based row of each UE.
    pub ue_row: Vec<usize>,
    /// Whether the direct BS-UE link is blocked.
    pub direct_blocked: Vec<bool>,
}

impl Geometry {
    pub fn n_ues(&self) -> usize {
        self.ue_positions.len()
    }

    pub fn n_ssms(&self) -> usize {
        self.ssm.len()
    }

    /// Distance from the BS center to the center of surface `l`.
    pub fn bs_ssm_distance(&self, l: usize) -> f64 {
        self.bs_center.dist(self.ssm[l].center)
    }
}

/// Builds the cabin geometry for a validated configuration.
pub fn build_geometry(cfg: &ScenarioConfig) -> Result<Geometry> {
    cfg.validate()?;
    let lambda = cfg.wavelength();
    let bs_row = cfg.bs_row();
    let row_x = |row: usize| row as f64 * cfg.seat_pitch;

    // BS: horizontal UPA centered over the middle row.
    let bs_center = Vec3::new(row_x(bs_row), 0.0, cfg.ceiling_height);
    let nb = isqrt(cfg.n_bs);
    let dbs = cfg.bs_spacing * lambda;
    let mut bs_elements = Vec::with_capacity(cfg.n_bs);
    for a in 0..nb {
        for b in 0..nb {
            let ox = (a as f64 - (nb as f64 - 1.0) / 2.0) * dbs;
            let oy = (b as f64 - (nb as f64 - 1.0) / 2.0) * dbs;
            bs_elements.push(Vec3::new(bs_center.x + ox, bs_center.y + oy, bs_center.z));
        }
    }

    // Surfaces: vertical panels above the middle seats, offset slightly away
    // from the BS along the row axis, reflective side facing the BS.
    let nm = isqrt(cfg.n_elem);
    let dms = cfg.ms_spacing * lambda;
    let mut ssm = Vec::with_capacity(cfg.rows * SSMS_PER_ROW);
    for row in 1..=cfg.rows {
        let toward_bs: f64 = if row <= bs_row { 1.0 } else { -1.0 };
        let cx = row_x(row) - toward_bs * SSM_ROW_OFFSET * cfg.seat_pitch;
        for &sy in &SSM_Y {
            let center = Vec3::new(cx, sy, cfg.ssm_height);
            let mut elements = Vec::with_capacity(cfg.n_elem);
            for gr in 0..nm {
                for gc in 0..nm {
                    let oy = (gc as f64 - (nm as f64 - 1.0) / 2.0) * dms;
                    let oz = (gr as f64 - (nm as f64 - 1.0) / 2.0) * dms;
                    elements.push(Vec3::new(center.x, center.y + oy, center.z + oz));
                }
            }
            ssm.push(SsmPanel {
                center,
                elements,
                normal: Vec3::new(toward_bs, 0.0, 0.0),
                row,
            });
        }
    }

    // UEs: one per seat at phone height.
    let mut ue_positions = Vec::with_capacity(cfg.rows * SEATS_PER_ROW);
    let mut ue_row = Vec::with_capacity(cfg.rows * SEATS_PER_ROW);
    for row in 1..=cfg.rows {
        for &sy in &SEAT_Y {
            ue_positions.push(Vec3::new(row_x(row), sy, cfg.seat_height));
            ue_row.push(row);
        }
    }

    let direct_blocked = match &cfg.ue_blockage_override {
        Some(o) => o.clone(),
        None => ue_row
            .iter()
            .map(|&r| (r as isize - bs_row as isize).unsigned_abs() > cfg.blockage_row_radius)
            .collect(),
    };

    Ok(Geometry {
        bs_elements,
        bs_center,
        bs_row,
        ssm,
        ue_positions,
        ue_row,
        direct_blocked,
    })
}

/// Per-surface working-mode pattern: a square lower-left reflecting block,
/// the rest harvesting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Preset {
    /// Per-element mode; `true` = reflecting.
    pub beta: Vec<bool>,
    /// Number of reflecting elements.
    pub m_bar: usize,
}

impl Preset {
    /// Indices of reflecting elements.
    pub fn reflect_idx(&self) -> Vec<usize> {
        self.beta
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect()
    }

    /// Indices of harvesting elements.
    pub fn harvest_idx(&self) -> Vec<usize> {
        self.beta
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| (!b).then_some(i))
            .collect()
    }

    pub fn n_elem(&self) -> usize {
        self.beta.len()
    }
}

/// Builds the preset with a `sqrt(m_bar) x sqrt(m_bar)` reflecting block
/// anchored at the lower-left grid corner.
pub fn build_preset(n_elem: usize, m_bar: usize) -> Result<Preset> {
    if !is_perfect_square(n_elem) || n_elem == 0 {
        return Err(Error::Config(format!(
            "n_elem {n_elem} must be a positive perfect square"
        )));
    }
    if !is_perfect_square(m_bar) {
        return Err(Error::Config(format!(
            "m_bar {m_bar} must be a perfect square"
        )));
    }
    if m_bar > n_elem {
        return Err(Error::Config(format!("m_bar {m_bar} > n_elem {n_elem}")));
    }
    let nm = isqrt(n_elem);
    let s = isqrt(m_bar);
    let mut beta = vec![false; n_elem];
    for gr in 0..s {
        for gc in 0..s {
            beta[gr * nm + gc] = true;
        }
    }
    Ok(Preset { beta, m_bar })
}

/// One UE row together with the facing surfaces it is optimized with.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverageGroup {
    /// Group index (equals the 1-based UE row).
    pub index: usize,
    /// UE ids in the group.
    pub ue_ids: Vec<usize>,
    /// Surface ids in the group.
    pub ssm_ids: Vec<usize>,
}

impl CoverageGroup {
    pub fn n_ues(&self) -> usize {
        self.ue_ids.len()
    }

    pub fn n_ssms(&self) -> usize {
        self.ssm_ids.len()
    }
}

/// Forms one coverage group per UE row: the row's UEs plus the surfaces of
/// the `ssm_rows_per_group` nearest rows whose reflective side faces the row
/// (rows on the far side of the row relative to the BS, starting at the row
/// itself). Rows outside the cabin are skipped.
pub fn form_coverage_groups(geom: &Geometry, cfg: &ScenarioConfig) -> Vec<CoverageGroup> {
    let mut groups = Vec::with_capacity(cfg.rows);
    for row in 1..=cfg.rows {
        let ue_ids: Vec<usize> = (0..geom.n_ues()).filter(|&k| geom.ue_row[k] == row).collect();
        // Away-from-BS direction; the BS row itself uses the lower side.
        let step: isize = if row <= geom.bs_row { -1 } else { 1 };
        let mut ssm_ids = Vec::new();
        for j in 0..cfg.ssm_rows_per_group as isize {
            let r = row as isize + step * j;
            if r < 1 || r > cfg.rows as isize {
                continue;
            }
            for (l, panel) in geom.ssm.iter().enumerate() {
                if panel.row == r as usize {
                    ssm_ids.push(l);
                }
            }
        }
        groups.push(CoverageGroup {
            index: row,
            ue_ids,
            ssm_ids,
        });
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_cabin_has_186_ues_and_62_ssms() {
        let cfg = ScenarioConfig::default();
        let geom = build_geometry(&cfg).unwrap();
        assert_eq!(geom.n_ues(), 186);
        assert_eq!(geom.n_ssms(), 62);
        assert_eq!(geom.bs_row, 16);
    }

    #[test]
    fn single_row_cabin_has_no_blockage() {
        let cfg = ScenarioConfig {
            rows: 1,
            ..Default::default()
        };
        let geom = build_geometry(&cfg).unwrap();
        assert_eq!(geom.bs_row, 1);
        assert!(geom.direct_blocked.iter().all(|&b| !b));
    }

    #[test]
    fn blockage_radius_three_unblocks_rows_13_to_19() {
        let cfg = ScenarioConfig::default();
        let geom = build_geometry(&cfg).unwrap();
        let unblocked: Vec<usize> = (0..geom.n_ues()).filter(|&k| !geom.direct_blocked[k]).collect();
        assert_eq!(unblocked.len(), 42);
        for &k in &unblocked {
            assert!(geom.ue_row[k] >= 13 && geom.ue_row[k] <= 19);
        }
    }

    #[test]
    fn zero_rows_is_a_config_error() {
        let cfg = ScenarioConfig {
            rows: 0,
            ..Default::default()
        };
        assert!(matches!(build_geometry(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn preset_corner_block() {
        let p = build_preset(16, 4).unwrap();
        assert_eq!(p.reflect_idx(), vec![0, 1, 4, 5]); // grid (0,0),(0,1),(1,0),(1,1)
        assert_eq!(p.harvest_idx().len(), 12);
    }

    #[test]
    fn preset_full_surface() {
        let p = build_preset(16, 16).unwrap();
        assert!(p.beta.iter().all(|&b| b));
        assert!(p.harvest_idx().is_empty());
    }

    #[test]
    fn preset_1024_169() {
        let p = build_preset(1024, 169).unwrap();
        assert_eq!(p.reflect_idx().len(), 169);
        assert_eq!(p.harvest_idx().len(), 855);
        // 13x13 block in grid coordinates
        for gr in 0..13 {
            for gc in 0..13 {
                assert!(p.beta[gr * 32 + gc]);
            }
        }
    }

    #[test]
    fn preset_rejects_non_squares() {
        assert!(build_preset(16, 3).is_err());
        assert!(build_preset(15, 4).is_err());
        assert!(build_preset(4, 16).is_err());
    }

    #[test]
    fn preset_partitions_all_elements() {
        for (m, mb) in [(16, 4), (64, 25), (1024, 256), (9, 9), (4, 1)] {
            let p = build_preset(m, mb).unwrap();
            let mut seen = vec![false; m];
            for i in p.reflect_idx() {
                seen[i] = true;
            }
            for i in p.harvest_idx() {
                assert!(!seen[i], "overlap at {i}");
                seen[i] = true;
            }
            assert!(seen.iter().all(|&s| s));
        }
    }

    #[test]
    fn preset_is_deterministic() {
        assert_eq!(build_preset(64, 16).unwrap(), build_preset(64, 16).unwrap());
    }

    #[test]
    fn interior_group_has_6_ues_4_ssms() {
        let cfg = ScenarioConfig::default();
        let geom = build_geometry(&cfg).unwrap();
        let groups = form_coverage_groups(&geom, &cfg);
        let g = &groups[9]; // row 10, interior and below the BS row
        assert_eq!(g.n_ues(), 6);
        assert_eq!(g.n_ssms(), 4);
        let rows: Vec<usize> = g.ssm_ids.iter().map(|&l| geom.ssm[l].row).collect();
        assert!(rows.contains(&10) && rows.contains(&9));
    }

    #[test]
    fn one_ssm_row_per_group_gives_2_ssms() {
        let cfg = ScenarioConfig {
            ssm_rows_per_group: 1,
            ..Default::default()
        };
        let geom = build_geometry(&cfg).unwrap();
        let groups = form_coverage_groups(&geom, &cfg);
        assert!(groups.iter().all(|g| g.n_ssms() == 2 && g.n_ues() == 6));
    }

    #[test]
    fn boundary_group_skips_missing_rows() {
        let cfg = ScenarioConfig::default();
        let geom = build_geometry(&cfg).unwrap();
        let groups = form_coverage_groups(&geom, &cfg);
        // Row 1 is below the BS; row 0 does not exist.
        assert_eq!(groups[0].n_ssms(), 2);
        // Topmost row is above the BS; row 32 does not exist.
        assert_eq!(groups[30].n_ssms(), 2);
    }

    #[test]
    fn groups_partition_ues_exactly() {
        let cfg = ScenarioConfig {
            rows: 7,
            ..Default::default()
        };
        let geom = build_geometry(&cfg).unwrap();
        let groups = form_coverage_groups(&geom, &cfg);
        let mut seen = vec![0usize; geom.n_ues()];
        for g in &groups {
            assert!(!g.ue_ids.is_empty());
            assert!(!g.ssm_ids.is_empty());
            for &k in &g.ue_ids {
                seen[k] += 1;
            }
            for &l in &g.ssm_ids {
                assert!(l < geom.n_ssms());
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn config_json_roundtrip_and_defaults() {
        let cfg = ScenarioConfig::from_json("{\"rows\": 5}").unwrap();
        assert_eq!(cfg.rows, 5);
        assert_eq!(cfg.n_bs, 64);
        assert!(ScenarioConfig::from_json("{\"rows\": \"x\"}").is_err());
        assert!(ScenarioConfig::from_json("{\"tau_min\": 1.5}").is_err());
    }
}
