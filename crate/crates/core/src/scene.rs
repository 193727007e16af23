//! Radar nodes, targets, propagation paths and the link budget.
//!
//! Geometry is planar. Every receiving radar sees, per target, its own
//! mono-static echo and one bi-static echo from each other transmitter, plus a
//! direct line-of-sight (LOS) path from each other transmitter.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use crate::codes::{radar_code_shift, CodeSequence};
use crate::error::{Error, Result};
use crate::phasenoise::{self, PhaseNoiseProcess, PnMode, PsdMask};
use crate::units::{db_to_power, power_to_db, wavelength, SPEED_OF_LIGHT};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn unit(self) -> Option<Vec2> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self * (1.0 / n))
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

/// Gain versus off-boresight angle, in dB.
///
/// `LogLinear` interpolates linearly in dB between the boresight gain and the
/// gain at 90°. `Tabulated` takes measured `(angle_deg, gain_db)` points from
/// 0° to 90°. Angles beyond 90° hold the 90° value.
#[derive(Debug, Clone, PartialEq)]
pub enum AntennaPattern {
    LogLinear { boresight_db: f64, at_90_db: f64 },
    Tabulated(Vec<(f64, f64)>),
}

impl AntennaPattern {
    pub fn log_linear(boresight_db: f64, at_90_db: f64) -> Result<Self> {
        if !(boresight_db.is_finite() && at_90_db.is_finite()) || at_90_db > boresight_db {
            return Err(Error::BadScenario(format!(
                "antenna gain must not increase off boresight ({boresight_db} dB -> {at_90_db} dB)"
            )));
        }
        Ok(AntennaPattern::LogLinear {
            boresight_db,
            at_90_db,
        })
    }

    pub fn tabulated(points: Vec<(f64, f64)>) -> Result<Self> {
        let bad = |m: &str| Err(Error::BadScenario(format!("antenna table: {m}")));
        if points.len() < 2 {
            return bad("need at least two points");
        }
        if points[0].0 != 0.0 || points[points.len() - 1].0 != 90.0 {
            return bad("must span 0 to 90 degrees");
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return bad("angles must be strictly increasing");
            }
            if w[1].1 > w[0].1 {
                return bad("gain must be non-increasing in angle");
            }
        }
        if points.iter().any(|p| !p.1.is_finite()) {
            return bad("gains must be finite");
        }
        Ok(AntennaPattern::Tabulated(points))
    }

    pub fn gain_db(&self, angle_deg: f64) -> f64 {
        let a = angle_deg.abs().min(90.0);
        match self {
            AntennaPattern::LogLinear {
                boresight_db,
                at_90_db,
            } => boresight_db + (at_90_db - boresight_db) * a / 90.0,
            AntennaPattern::Tabulated(pts) => {
                let i = pts
                    .partition_point(|&(ang, _)| ang <= a)
                    .clamp(1, pts.len() - 1);
                let (a0, g0) = pts[i - 1];
                let (a1, g1) = pts[i];
                g0 + (g1 - g0) * (a - a0) / (a1 - a0)
            }
        }
    }

    pub fn gain(&self, angle_deg: f64) -> f64 {
        db_to_power(self.gain_db(angle_deg))
    }

    pub fn boresight_db(&self) -> f64 {
        self.gain_db(0.0)
    }

    pub fn at_90_db(&self) -> f64 {
        self.gain_db(90.0)
    }
}

#[derive(Debug, Clone)]
pub struct RadarNode {
    pub id: usize,
    pub position: Vec2,
    boresight: Vec2,
    pub tx_power_dbm: f64,
    pub antenna: AntennaPattern,
    code_shift: usize,
    pll: Option<Arc<PhaseNoiseProcess>>,
}

impl RadarNode {
    pub fn new(
        id: usize,
        position: Vec2,
        boresight: Vec2,
        tx_power_dbm: f64,
        antenna: AntennaPattern,
    ) -> Result<Self> {
        let boresight = boresight
            .unit()
            .ok_or_else(|| Error::BadScenario(format!("radar {id}: zero boresight")))?;
        if !tx_power_dbm.is_finite() {
            return Err(Error::BadScenario(format!("radar {id}: bad tx power")));
        }
        Ok(RadarNode {
            id,
            position,
            boresight,
            tx_power_dbm,
            antenna,
            code_shift: 0,
            pll: None,
        })
    }

    pub fn boresight(&self) -> Vec2 {
        self.boresight
    }

    pub fn code_shift(&self) -> usize {
        self.code_shift
    }

    pub fn pll(&self) -> Option<&PhaseNoiseProcess> {
        self.pll.as_deref()
    }

    /// Angle between boresight and the direction to `point`, degrees.
    pub fn off_boresight_deg(&self, point: Vec2) -> f64 {
        match (point - self.position).unit() {
            Some(dir) => dir.dot(self.boresight).clamp(-1.0, 1.0).acos().to_degrees(),
            None => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    pub position: Vec2,
    pub velocity: Vec2,
    pub rcs_dbsm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waveform {
    pub carrier_hz: f64,
    pub chip_s: f64,
    pub bursts: usize,
}

impl Waveform {
    /// 79 GHz carrier, 1 ns chips, 256 bursts.
    pub fn reference() -> Self {
        Waveform {
            carrier_hz: 79e9,
            chip_s: 1e-9,
            bursts: 256,
        }
    }

    pub fn wavelength(&self) -> f64 {
        wavelength(self.carrier_hz)
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    nodes: Vec<RadarNode>,
    targets: Vec<Target>,
    waveform: Waveform,
    code: CodeSequence,
    pub pn_enabled: bool,
    pub pn_mode: PnMode,
    /// Additive white noise power per sample, dBm. `None` disables it.
    pub thermal_noise_dbm: Option<f64>,
    pub noise_seed: u64,
}

impl Scenario {
    /// Validates the network and assigns each radar its code shift
    /// `L (m-1) / (2M)`. Radar ids must be `1..=M` in any order.
    pub fn new(
        mut nodes: Vec<RadarNode>,
        targets: Vec<Target>,
        waveform: Waveform,
        code: CodeSequence,
    ) -> Result<Self> {
        let m = nodes.len();
        if m == 0 {
            return Err(Error::BadScenario("no radar nodes".into()));
        }
        if !(waveform.carrier_hz > 0.0 && waveform.chip_s > 0.0) {
            return Err(Error::BadScenario(
                "carrier frequency and chip duration must be positive".into(),
            ));
        }
        if waveform.bursts == 0 {
            return Err(Error::BadScenario("need at least one burst".into()));
        }
        nodes.sort_by_key(|n| n.id);
        for (i, node) in nodes.iter_mut().enumerate() {
            if node.id != i + 1 {
                return Err(Error::BadScenario(format!(
                    "radar ids must be 1..={m} without repeats"
                )));
            }
            node.code_shift = radar_code_shift(node.id, m, code.len())?;
        }
        for t in &targets {
            if !t.rcs_dbsm.is_finite() {
                return Err(Error::BadScenario("target RCS must be finite".into()));
            }
        }
        Ok(Scenario {
            nodes,
            targets,
            waveform,
            code,
            pn_enabled: false,
            pn_mode: PnMode::Exact,
            thermal_noise_dbm: None,
            noise_seed: 0,
        })
    }

    pub fn nodes(&self) -> &[RadarNode] {
        &self.nodes
    }

    pub fn targets(&self) -> &[Target] {
        &self.targets
    }

    pub fn waveform(&self) -> &Waveform {
        &self.waveform
    }

    pub fn code(&self) -> &CodeSequence {
        &self.code
    }

    pub fn radar_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn code_length(&self) -> usize {
        self.code.len()
    }

    /// Range bins per radar section, `L / (2M)`.
    pub fn section_len(&self) -> usize {
        self.code_length() / (2 * self.radar_count())
    }

    pub fn burst_duration(&self) -> f64 {
        self.code_length() as f64 * self.waveform.chip_s
    }

    pub fn frame_len(&self) -> usize {
        self.code_length() * self.waveform.bursts
    }

    pub fn frame_duration(&self) -> f64 {
        self.frame_len() as f64 * self.waveform.chip_s
    }

    pub fn node(&self, id: usize) -> Result<&RadarNode> {
        self.nodes
            .get(id.wrapping_sub(1))
            .ok_or_else(|| Error::BadScenario(format!("no radar with id {id}")))
    }

    pub fn set_pll(&mut self, id: usize, process: PhaseNoiseProcess) -> Result<()> {
        self.node(id)?;
        self.nodes[id - 1].pll = Some(Arc::new(process));
        Ok(())
    }

    /// Draws one PLL realization per radar over the frame duration, seeded
    /// with `master_seed ^ id`, and enables phase noise.
    pub fn attach_phase_noise(
        &mut self,
        mask: &PsdMask,
        f_max: f64,
        master_seed: u64,
    ) -> Result<()> {
        let duration = self.frame_duration();
        for i in 0..self.nodes.len() {
            let id = self.nodes[i].id;
            let process = phasenoise::synthesize(mask, duration, f_max, pn_seed(master_seed, id))?;
            self.nodes[i].pll = Some(Arc::new(process));
        }
        self.pn_enabled = true;
        Ok(())
    }
}

/// Per-radar PN seed derived from the master seed.
pub fn pn_seed(master: u64, radar_id: usize) -> u64 {
    master ^ radar_id as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathKind {
    Mono,
    Bistatic,
    Los,
}

impl PathKind {
    pub fn name(self) -> &'static str {
        match self {
            PathKind::Mono => "mono",
            PathKind::Bistatic => "bistatic",
            PathKind::Los => "los",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationPath {
    pub kind: PathKind,
    pub tx_id: usize,
    pub rx_id: usize,
    pub target: Option<usize>,
    pub delay_s: f64,
    pub doppler_hz: f64,
    /// Linear voltage gain, `sqrt(P_rx / 1 mW)`.
    pub amplitude: f64,
    pub power_dbm: f64,
    pub aod_deg: f64,
    pub aoa_deg: f64,
}

impl PropagationPath {
    /// Whole-chip delay `floor(τ / T_c)`.
    pub fn delay_bins(&self, chip_s: f64) -> usize {
        delay_to_bin(self.delay_s, chip_s)
    }
}

pub fn delay_to_bin(delay_s: f64, chip_s: f64) -> usize {
    // the tolerance keeps exact multiples from landing one bin low
    (delay_s / chip_s + 1e-9).floor().max(0.0) as usize
}

/// All paths arriving at `rx_id`: per target a mono path and one bi-static
/// path per other transmitter, followed by one LOS path per other transmitter.
pub fn enumerate_paths(scenario: &Scenario, rx_id: usize) -> Result<Vec<PropagationPath>> {
    let rx = scenario.node(rx_id)?;
    let lambda = scenario.waveform.wavelength();
    let fc = scenario.waveform.carrier_hz;
    let mut paths = Vec::new();

    for (ti, target) in scenario.targets.iter().enumerate() {
        let rcs = db_to_power(target.rcs_dbsm);
        let rx_vec = target.position - rx.position;
        let r_rx = rx_vec.norm();
        let u_rx = rx_vec.unit().ok_or(Error::ZeroRange)?;
        let aoa = rx.off_boresight_deg(target.position);
        for tx in &scenario.nodes {
            let tx_vec = target.position - tx.position;
            let r_tx = tx_vec.norm();
            let u_tx = tx_vec.unit().ok_or(Error::ZeroRange)?;
            let aod = tx.off_boresight_deg(target.position);
            let pt = db_to_power(tx.tx_power_dbm);
            let range_rate = target.velocity.dot(u_tx) + target.velocity.dot(u_rx);
            let (kind, power_dbm) = if tx.id == rx_id {
                let g = rx.antenna.gain(aoa);
                (PathKind::Mono, mono_rx_power(pt, g, lambda, rcs, r_rx)?)
            } else {
                let power = bistatic_rx_power(
                    pt,
                    tx.antenna.gain(aod),
                    rx.antenna.gain(aoa),
                    lambda,
                    rcs,
                    r_tx,
                    r_rx,
                )?;
                (PathKind::Bistatic, power)
            };
            paths.push(PropagationPath {
                kind,
                tx_id: tx.id,
                rx_id,
                target: Some(ti),
                delay_s: (r_tx + r_rx) / SPEED_OF_LIGHT,
                // 2v/λ for the mono path, v_bi·f_c/c in general
                doppler_hz: range_rate * fc / SPEED_OF_LIGHT,
                amplitude: db_to_power(power_dbm).sqrt(),
                power_dbm,
                aod_deg: aod,
                aoa_deg: aoa,
            });
        }
    }

    for tx in scenario.nodes.iter().filter(|n| n.id != rx_id) {
        let r_los = (rx.position - tx.position).norm();
        let aod = tx.off_boresight_deg(rx.position);
        let aoa = rx.off_boresight_deg(tx.position);
        let power_dbm = los_rx_power(
            db_to_power(tx.tx_power_dbm),
            tx.antenna.gain(aod),
            rx.antenna.gain(aoa),
            lambda,
            r_los,
        )?;
        paths.push(PropagationPath {
            kind: PathKind::Los,
            tx_id: tx.id,
            rx_id,
            target: None,
            delay_s: r_los / SPEED_OF_LIGHT,
            doppler_hz: 0.0,
            amplitude: db_to_power(power_dbm).sqrt(),
            power_dbm,
            aod_deg: aod,
            aoa_deg: aoa,
        });
    }
    Ok(paths)
}

fn check_range(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::ZeroRange)
    }
}

/// Two-way radar equation `P_t G² λ² σ / ((4π)³ R⁴)`, in dB relative to the
/// unit of `tx_power` (dBm for milliwatts). Gains and `rcs` are linear.
pub fn mono_rx_power(tx_power: f64, gain: f64, lambda: f64, rcs: f64, range: f64) -> Result<f64> {
    check_range(range)?;
    Ok(power_to_db(
        tx_power * gain * gain * lambda * lambda * rcs / ((4.0 * PI).powi(3) * range.powi(4)),
    ))
}

/// One-way Friis equation `P_t G_tx G_rx λ² / (4π R)²`.
pub fn los_rx_power(
    tx_power: f64,
    gain_tx: f64,
    gain_rx: f64,
    lambda: f64,
    range: f64,
) -> Result<f64> {
    check_range(range)?;
    Ok(power_to_db(
        tx_power * gain_tx * gain_rx * lambda * lambda / (4.0 * PI * range).powi(2),
    ))
}

/// Bi-static radar equation `P_t G_tx G_rx λ² σ / ((4π)³ R1² R2²)`.
pub fn bistatic_rx_power(
    tx_power: f64,
    gain_tx: f64,
    gain_rx: f64,
    lambda: f64,
    rcs: f64,
    range_tx: f64,
    range_rx: f64,
) -> Result<f64> {
    check_range(range_tx)?;
    check_range(range_rx)?;
    Ok(power_to_db(
        tx_power * gain_tx * gain_rx * lambda * lambda * rcs
            / ((4.0 * PI).powi(3) * range_tx.powi(2) * range_rx.powi(2)),
    ))
}

/// LOS-to-mono power ratio `4π G_90² R_mono⁴ / (G_t² R_los² σ)` in dB.
/// All inputs linear.
pub fn los_to_mono_ratio(g_90: f64, g_t: f64, r_mono: f64, r_los: f64, rcs: f64) -> Result<f64> {
    check_range(r_mono)?;
    check_range(r_los)?;
    Ok(power_to_db(
        4.0 * PI * g_90 * g_90 * r_mono.powi(4) / (g_t * g_t * r_los * r_los * rcs),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::generate_p3;

    fn pair(target: Target) -> Scenario {
        let ant = AntennaPattern::log_linear(10.0, -7.0).unwrap();
        let up = Vec2::new(0.0, 1.0);
        let nodes = vec![
            RadarNode::new(1, Vec2::new(-0.5, 0.0), up, 10.0, ant.clone()).unwrap(),
            RadarNode::new(2, Vec2::new(0.5, 0.0), up, 10.0, ant).unwrap(),
        ];
        Scenario::new(nodes, vec![target], Waveform::reference(), generate_p3(504)).unwrap()
    }

    fn static_target(x: f64, y: f64) -> Target {
        Target {
            position: Vec2::new(x, y),
            velocity: Vec2::default(),
            rcs_dbsm: 10.0,
        }
    }

    #[test]
    fn receiver_sees_mono_bistatic_and_los() {
        let s = pair(static_target(0.0, 24.75f64.sqrt()));
        let paths = enumerate_paths(&s, 1).unwrap();
        let kinds: Vec<PathKind> = paths.iter().map(|p| p.kind).collect();
        assert_eq!(
            kinds,
            vec![PathKind::Mono, PathKind::Bistatic, PathKind::Los]
        );
        assert!(paths.iter().all(|p| p.doppler_hz == 0.0));
        let mono = paths[0];
        assert!((mono.delay_s - 33.356e-9).abs() < 1e-12);
        assert_eq!(mono.delay_bins(1e-9), 33);
        let los = paths[2];
        assert!((los.delay_s - 3.336e-9).abs() < 1e-12);
        assert_eq!(los.delay_bins(1e-9), 3);
        assert_eq!(s.node(2).unwrap().code_shift(), 126);
    }

    #[test]
    fn path_amplitude_matches_power() {
        let s = pair(static_target(1.0, 7.0));
        for p in enumerate_paths(&s, 2).unwrap() {
            assert!((power_to_db(p.amplitude * p.amplitude) - p.power_dbm).abs() < 1e-9);
        }
    }

    #[test]
    fn mono_doppler_from_radial_velocity() {
        let mut t = static_target(-0.5, 20.0);
        t.velocity = Vec2::new(0.0, 30.0);
        let s = pair(t);
        let mono = enumerate_paths(&s, 1).unwrap()[0];
        let expected = 2.0 * 30.0 / wavelength(79e9);
        assert!((mono.doppler_hz - expected).abs() < 1e-9);
        assert!((mono.doppler_hz - 15.81e3).abs() < 10.0);
    }

    #[test]
    fn radar_equation_scaling() {
        let lambda = wavelength(79e9);
        let p1 = mono_rx_power(10.0, 10.0, lambda, 10.0, 5.0).unwrap();
        let p2 = mono_rx_power(10.0, 10.0, lambda, 10.0, 10.0).unwrap();
        assert!((p1 - p2 - 40.0 * 2f64.log10()).abs() < 1e-9);
        let p3 = mono_rx_power(10.0, 10.0, lambda, 100.0, 5.0).unwrap();
        assert!((p3 - p1 - 10.0).abs() < 1e-9);
        assert!(matches!(
            mono_rx_power(1.0, 1.0, lambda, 1.0, 0.0),
            Err(Error::ZeroRange)
        ));
    }

    #[test]
    fn friis_and_bistatic_scaling() {
        let lambda = wavelength(79e9);
        let a = los_rx_power(10.0, 0.2, 0.2, lambda, 1.0).unwrap();
        let b = los_rx_power(10.0, 0.2, 0.2, lambda, 2.0).unwrap();
        assert!((a - b - 20.0 * 2f64.log10()).abs() < 1e-9);
        let c = los_rx_power(10.0, 2.0, 0.2, lambda, 1.0).unwrap();
        assert!((c - a - 10.0).abs() < 1e-9);

        let mono = mono_rx_power(10.0, 3.0, lambda, 5.0, 4.0).unwrap();
        let bi = bistatic_rx_power(10.0, 3.0, 3.0, lambda, 5.0, 4.0, 4.0).unwrap();
        assert!((mono - bi).abs() < 1e-9);
        let bi2 = bistatic_rx_power(10.0, 3.0, 3.0, lambda, 5.0, 8.0, 4.0).unwrap();
        assert!((bi - bi2 - 20.0 * 2f64.log10()).abs() < 1e-9);
        let swapped = bistatic_rx_power(10.0, 3.0, 3.0, lambda, 5.0, 4.0, 8.0).unwrap();
        assert!((bi2 - swapped).abs() < 1e-12);
    }

    #[test]
    fn link_budget_ratio() {
        let r = los_to_mono_ratio(
            db_to_power(-7.0),
            db_to_power(10.0),
            5.0,
            1.0,
            db_to_power(10.0),
        )
        .unwrap();
        assert!((r + 5.05).abs() < 0.01, "{r}");
        // balance point: R_mono⁴ = R_los² σ / (4π)
        let rcs = 4.0 * PI * 16.0;
        let bal = los_to_mono_ratio(2.0, 2.0, 2.0, 1.0, rcs).unwrap();
        assert!(bal.abs() < 1e-9);
        let plus3 = los_to_mono_ratio(2.0, 2.0, 2.0, 1.0, rcs * db_to_power(3.0)).unwrap();
        assert!((plus3 + 3.0).abs() < 1e-9);
    }

    #[test]
    fn ratio_matches_constituent_equations() {
        let lambda = wavelength(79e9);
        let (g90, gt, rcs) = (db_to_power(-7.0), db_to_power(10.0), db_to_power(10.0));
        let los = los_rx_power(10.0, g90, g90, lambda, 1.0).unwrap();
        let mono = mono_rx_power(10.0, gt, lambda, rcs, 5.0).unwrap();
        let ratio = los_to_mono_ratio(g90, gt, 5.0, 1.0, rcs).unwrap();
        assert!((ratio - (los - mono)).abs() < 1e-9);
    }

    #[test]
    fn antenna_pattern_endpoints_and_monotonicity() {
        let ant = AntennaPattern::log_linear(10.0, -7.0).unwrap();
        assert_eq!(ant.gain_db(0.0), 10.0);
        assert_eq!(ant.gain_db(90.0), -7.0);
        assert_eq!(ant.gain_db(135.0), -7.0);
        let tab = AntennaPattern::tabulated(vec![(0.0, 12.0), (30.0, 9.0), (90.0, -7.0)]).unwrap();
        assert_eq!(tab.gain_db(0.0), 12.0);
        assert_eq!(tab.gain_db(90.0), -7.0);
        assert!((tab.gain_db(15.0) - 10.5).abs() < 1e-12);
        for pat in [ant, tab] {
            let mut prev = f64::INFINITY;
            for a in 0..=90 {
                let g = pat.gain_db(a as f64);
                assert!(g <= prev);
                prev = g;
            }
        }
        assert!(AntennaPattern::tabulated(vec![(0.0, 1.0), (90.0, 2.0)]).is_err());
        assert!(AntennaPattern::log_linear(-7.0, 10.0).is_err());
    }

    #[test]
    fn scenario_validation() {
        let ant = AntennaPattern::log_linear(10.0, -7.0).unwrap();
        let up = Vec2::new(0.0, 1.0);
        let nodes = vec![
            RadarNode::new(1, Vec2::new(0.0, 0.0), up, 10.0, ant.clone()).unwrap(),
            RadarNode::new(2, Vec2::new(1.0, 0.0), up, 10.0, ant.clone()).unwrap(),
        ];
        let err = Scenario::new(
            nodes.clone(),
            vec![],
            Waveform::reference(),
            generate_p3(14),
        );
        assert!(matches!(err, Err(Error::IndivisibleCode { .. })));
        let dup = vec![nodes[0].clone(), nodes[0].clone()];
        assert!(Scenario::new(dup, vec![], Waveform::reference(), generate_p3(16)).is_err());
        assert!(RadarNode::new(1, Vec2::default(), Vec2::default(), 10.0, ant).is_err());
    }
}
