//! Seeded synthetic datasets: PV-like daily profiles and concentric rings.

use std::f64::consts::PI;

use rand::Rng;

use crate::profiles::ProfileSet;
use crate::seed::rng;

/// Shape of one family of daily generation curves.
#[derive(Debug, Clone, Copy)]
pub struct Archetype {
    /// Peak output, per unit of capacity.
    pub peak: f64,
    /// Hour of peak output.
    pub noon: f64,
    /// Standard deviation of the bell, in hours.
    pub width: f64,
}

/// Two weather regimes (clear and overcast), each with near-duplicate
/// variants.
pub const PV_ARCHETYPES: [Archetype; 5] = [
    Archetype { peak: 1.00, noon: 12.0, width: 2.6 },
    Archetype { peak: 0.32, noon: 12.0, width: 2.2 },
    Archetype { peak: 0.88, noon: 12.6, width: 2.4 },
    Archetype { peak: 0.22, noon: 11.6, width: 2.0 },
    Archetype { peak: 0.94, noon: 11.4, width: 2.8 },
];

/// Hourly PV-like profiles over 24 hours, archetypes assigned round-robin so
/// every prefix of the set covers all of them.
pub fn pv_profiles(n: usize, seed: u64) -> ProfileSet {
    let mut rng = rng(seed);
    let rows = (0..n)
        .map(|i| {
            let a = PV_ARCHETYPES[i % PV_ARCHETYPES.len()];
            let peak = a.peak * rng.gen_range(0.85..1.15);
            let noon = a.noon + rng.gen_range(-0.4..0.4);
            let width = a.width * rng.gen_range(0.9..1.1);
            (0..24)
                .map(|h| {
                    let t = h as f64 + 0.5;
                    if !(5.0..=19.0).contains(&t) {
                        return 0.0;
                    }
                    let z = (t - noon) / width;
                    let clean = peak * (-0.5 * z * z).exp();
                    (clean + rng.gen_range(-0.03..0.03) * peak).max(0.0)
                })
                .collect()
        })
        .collect();
    ProfileSet::new(rows).expect("n >= 2")
}

/// Two concentric noisy rings in the plane, inner ring first. Each point is
/// a length-2 profile.
pub fn rings(per_ring: usize, inner: f64, outer: f64, noise: f64, seed: u64) -> ProfileSet {
    let mut rng = rng(seed);
    let mut rows = Vec::with_capacity(2 * per_ring);
    for radius in [inner, outer] {
        for k in 0..per_ring {
            let theta = 2.0 * PI * (k as f64 + rng.gen_range(0.0..0.5)) / per_ring as f64;
            let r = radius + rng.gen_range(-noise..=noise);
            rows.push(vec![r * theta.cos(), r * theta.sin()]);
        }
    }
    ProfileSet::new(rows).expect("per_ring >= 1")
}
