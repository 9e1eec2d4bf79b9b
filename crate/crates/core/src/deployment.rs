//! Gateway and end-device geometry.
//!
//! Devices live in concentric distance rings around their home gateway.
//! Ring populations follow an arithmetic progression — the least devices in
//! the nearest and farthest rings — or a Fibonacci ladder kept as the
//! baseline that aggravates the far-near effect.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cluster::kmeans_cluster;
use crate::error::{Error, Result};
use crate::geometry::Point;

/// Ring radii (km, strictly increasing) and the device count each ring
/// holds per gateway.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RingPlan {
    pub radii_km: Vec<f64>,
    pub counts_per_gw: Vec<u32>,
}

impl RingPlan {
    /// The stock six-ring layout, 0.7 km innermost to 2.1 km outermost.
    pub fn default_radii() -> Vec<f64> {
        vec![0.7, 0.9, 1.1, 1.5, 1.6, 2.1]
    }

    pub fn validate(&self) -> Result<()> {
        if self.radii_km.is_empty() {
            return Err(Error::config("deployment.ring_radii_km", "need at least one ring"));
        }
        if self.radii_km.len() != self.counts_per_gw.len() {
            return Err(Error::config(
                "deployment.ring_radii_km",
                "ring radii and counts have different lengths",
            ));
        }
        let mut prev = 0.0;
        for &r in &self.radii_km {
            if r <= prev {
                return Err(Error::config("deployment.ring_radii_km", "radii must strictly increase"));
            }
            prev = r;
        }
        Ok(())
    }

    pub fn ring_count(&self) -> usize {
        self.radii_km.len()
    }

    /// Annulus bounds of ring `i`: (previous radius or 0, ring radius).
    pub fn annulus(&self, i: usize) -> (f64, f64) {
        let inner = if i == 0 { 0.0 } else { self.radii_km[i - 1] };
        (inner, self.radii_km[i])
    }
}

/// Per-gateway ring counts from an arithmetic progression.
///
/// Rings 1..n-1 (inner to outer) hold `first + (n-1) * diff`; the outermost
/// ring drops back to `first` so the far edge carries the least devices.
/// Multi-gateway counts divide each term by the gateway count, rounding
/// half-up.
pub fn arithmetic_allocation(
    first_term: u32,
    common_diff: u32,
    ring_count: usize,
    gw_count: u32,
) -> Result<Vec<u32>> {
    if first_term == 0 {
        return Err(Error::domain("arithmetic_allocation", "first term must be positive"));
    }
    if ring_count == 0 {
        return Err(Error::domain("arithmetic_allocation", "need at least one ring"));
    }
    if gw_count == 0 {
        return Err(Error::domain("arithmetic_allocation", "gateway count must be positive"));
    }
    let term = |n: usize| -> u64 { u64::from(first_term) + n as u64 * u64::from(common_diff) };
    let counts = (0..ring_count).map(|i| {
        let c = if i + 1 == ring_count { u64::from(first_term) } else { term(i) };
        // Half-up division by the gateway count.
        let g = u64::from(gw_count);
        ((2 * c + g) / (2 * g)) as u32
    });
    Ok(counts.collect())
}

/// Ring counts proportional to 1, 1, 2, 3, 5, 8, ... ascending outward,
/// scaled to `total`; the rounding remainder lands on the outermost ring.
pub fn fibonacci_allocation(total: u32, ring_count: usize) -> Result<Vec<u32>> {
    if total == 0 {
        return Err(Error::domain("fibonacci_allocation", "total must be positive"));
    }
    if ring_count == 0 {
        return Err(Error::domain("fibonacci_allocation", "need at least one ring"));
    }
    let mut weights = Vec::with_capacity(ring_count);
    let (mut a, mut b) = (1u64, 1u64);
    for _ in 0..ring_count {
        weights.push(a);
        let next = a + b;
        a = b;
        b = next;
    }
    let w_total: u64 = weights.iter().sum();
    let mut counts: Vec<u32> = weights
        .iter()
        .map(|&w| (u64::from(total) * w / w_total) as u32)
        .collect();
    let assigned: u32 = counts.iter().sum();
    *counts.last_mut().expect("ring_count >= 1") += total - assigned;
    Ok(counts)
}

/// Static power ladder over the six stock rings: 14 dBm innermost,
/// +3 dBm per ring, 29 dBm outermost.
pub fn tp_schedule(ring_index: usize) -> Result<f64> {
    if ring_index > 5 {
        return Err(Error::domain("tp_schedule", format!("ring {ring_index} outside 0..=5")));
    }
    Ok(14.0 + 3.0 * ring_index as f64)
}

/// How gateway positions are chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GwLayout {
    /// Centroids of a k-means run over a seeded uniform scatter across the
    /// deployment area — gateways settle where density demands them.
    Kmeans,
    /// Regular grid over the deployment area.
    Grid,
    /// Explicit coordinates, one per gateway.
    Explicit(Vec<Point<f64>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gateway {
    pub id: u32,
    pub pos: Point<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Device {
    pub id: u32,
    pub pos: Point<f64>,
    /// Index into the ring plan.
    pub ring: usize,
    /// Gateway this device was allocated to.
    pub home_gw: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Deployment {
    pub gateways: Vec<Gateway>,
    pub devices: Vec<Device>,
    pub ring_radii_km: Vec<f64>,
}

impl Deployment {
    pub fn device_positions(&self) -> Vec<Point<f64>> {
        self.devices.iter().map(|d| d.pos).collect()
    }
}

/// Realises a deployment: places `gw_count` gateways per `layout` inside a
/// square of side `area_km` centred on the origin, then drops the per-ring
/// device counts uniformly at random into each gateway's annuli.
/// Deterministic in `seed`.
pub fn generate_deployment(
    plan: &RingPlan,
    layout: &GwLayout,
    gw_count: u32,
    area_km: f64,
    seed: u64,
) -> Result<Deployment> {
    plan.validate()?;
    if gw_count == 0 {
        return Err(Error::config("deployment.gw_count", "need at least one gateway"));
    }
    if area_km <= 0.0 {
        return Err(Error::config("deployment.area_km", "area side must be positive"));
    }

    let gw_positions = place_gateways(layout, gw_count, area_km, seed)?;
    let gateways: Vec<Gateway> = gw_positions
        .into_iter()
        .enumerate()
        .map(|(i, pos)| Gateway { id: i as u32, pos })
        .collect();

    // Device stream is independent of the gateway-placement stream so a
    // layout change cannot silently reshuffle device geometry.
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_ded1_ce00_0001);
    let mut devices = Vec::new();
    let mut next_id = 0u32;
    for gw in &gateways {
        for ring in 0..plan.ring_count() {
            let (inner, outer) = plan.annulus(ring);
            for _ in 0..plan.counts_per_gw[ring] {
                let pos = sample_annulus(&mut rng, gw.pos, inner, outer);
                devices.push(Device { id: next_id, pos, ring, home_gw: gw.id });
                next_id += 1;
            }
        }
    }

    Ok(Deployment { gateways, devices, ring_radii_km: plan.radii_km.clone() })
}

fn place_gateways(layout: &GwLayout, gw_count: u32, area_km: f64, seed: u64) -> Result<Vec<Point<f64>>> {
    let half = area_km / 2.0;
    match layout {
        GwLayout::Explicit(points) => {
            if points.len() != gw_count as usize {
                return Err(Error::config(
                    "deployment.gw_layout",
                    format!("{} explicit positions for {} gateways", points.len(), gw_count),
                ));
            }
            for (i, a) in points.iter().enumerate() {
                for b in &points[i + 1..] {
                    if a == b {
                        return Err(Error::config("deployment.gw_layout", "duplicate gateway position"));
                    }
                }
            }
            Ok(points.clone())
        }
        GwLayout::Grid => {
            let side = (f64::from(gw_count)).sqrt().ceil() as u32;
            let cell = area_km / f64::from(side);
            let mut pts = Vec::with_capacity(gw_count as usize);
            'outer: for row in 0..side {
                for col in 0..side {
                    if pts.len() == gw_count as usize {
                        break 'outer;
                    }
                    pts.push(Point::new(
                        -half + cell * (f64::from(col) + 0.5),
                        -half + cell * (f64::from(row) + 0.5),
                    ));
                }
            }
            Ok(pts)
        }
        GwLayout::Kmeans => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_6a7e_3a7e_0002);
            let scatter: Vec<Point<f64>> = (0..(gw_count as usize * 60).max(200))
                .map(|_| Point::new(rng.gen_range(-half..half), rng.gen_range(-half..half)))
                .collect();
            let clustering = kmeans_cluster(&scatter, gw_count as usize, 60, 1e-9, seed ^ 0x5eed_6a7e)?;
            let mut pts = clustering.centroids;
            // Sort for a stable id order independent of k-means internals.
            pts.sort_by(|a, b| (a.x, a.y).partial_cmp(&(b.x, b.y)).expect("finite coords"));
            Ok(pts)
        }
    }
}

/// Machine-clustering pass: every device joins its nearest gateway (ties
/// toward the lowest id) and its ring is recomputed from the annulus its
/// new distance falls in. A device only ever moves to a *closer* gateway,
/// so the new distance stays inside the outermost radius and the annulus
/// containment invariant is preserved. With overlapping cells this swells
/// the nearest clusters of tightly packed gateways at the expense of the
/// far rings of their neighbours.
pub fn cluster_devices_to_gateways(deployment: &mut Deployment) -> Result<()> {
    if deployment.gateways.is_empty() {
        return Err(Error::domain("cluster_devices_to_gateways", "no gateways"));
    }
    let radii = deployment.ring_radii_km.clone();
    for dev in &mut deployment.devices {
        let mut best_gw = dev.home_gw;
        let mut best_d = dev
            .pos
            .distance(&deployment.gateways[dev.home_gw as usize].pos);
        for gw in &deployment.gateways {
            let d = gw.pos.distance(&dev.pos);
            if d < best_d || (d == best_d && gw.id < best_gw) {
                best_d = d;
                best_gw = gw.id;
            }
        }
        let ring = radii.partition_point(|&r| r < best_d);
        if ring >= radii.len() {
            return Err(Error::domain(
                "cluster_devices_to_gateways",
                format!("device {} at {best_d:.3} km lies outside the outermost ring", dev.id),
            ));
        }
        dev.home_gw = best_gw;
        dev.ring = ring;
    }
    Ok(())
}

fn sample_annulus<R: Rng>(rng: &mut R, center: Point<f64>, inner_km: f64, outer_km: f64) -> Point<f64> {
    // Uniform over the annulus area.
    let u: f64 = rng.gen_range(0.0..1.0);
    let r = (u * (outer_km * outer_km - inner_km * inner_km) + inner_km * inner_km).sqrt();
    let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    Point::new(center.x + r * theta.cos(), center.y + r * theta.sin())
}
