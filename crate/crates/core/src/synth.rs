//! Deterministic synthetic corpora for benchmarks and stress tests.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub seed: u64,
    pub packages: usize,
    pub versions_per_package: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 7,
            packages: 100,
            versions_per_package: 10,
        }
    }
}

const CONSTRAINT_POOL: [&str; 10] = [
    "^1.0.0", "~1.2.0", ">=1.0.0", "*", "=1.0.0", "1.x", "^0.3.1",
    ">=1.0.0 <2.0.0", "^2.0.0 || ^3.0.0", "latest",
];

/// Generate packuments with version histories that are chronologically
/// consistent per major line, plus occasional parallel major branches and
/// sprinkled prereleases. Identical configs yield identical documents.
pub fn synth_packuments(config: &SynthConfig) -> Vec<Value> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut docs = Vec::with_capacity(config.packages);

    for p in 0..config.packages {
        let name = format!("pkg-{p:05}");
        let mut versions = Map::new();
        let mut time = Map::new();

        // Walk versions forward; sometimes fork a new major early so
        // later bug releases on the old major interleave.
        let mut major: u64 = if rng.gen_bool(0.2) { 0 } else { 1 };
        let mut minor: u64 = 0;
        let mut bug: u64 = 0;
        // Stagger packages across ~3 years of history; wrap so large
        // corpora never spill past the present.
        let mut clock: i64 = 1_500_000_000_000 + (p as i64 % 1_000) * 86_400_000;

        for _ in 0..config.versions_per_package {
            let roll: f64 = rng.gen();
            if roll < 0.08 {
                major += 1;
                minor = 0;
                bug = 0;
            } else if roll < 0.30 {
                minor += 1;
                bug = 0;
            } else {
                bug += 1;
            }
            let vtext = if rng.gen_bool(0.05) {
                format!("{major}.{minor}.{bug}-rc.1")
            } else {
                format!("{major}.{minor}.{bug}")
            };
            if versions.contains_key(&vtext) {
                continue;
            }

            let mut deps = Map::new();
            for _ in 0..rng.gen_range(0..4usize) {
                let target = format!("pkg-{:05}", rng.gen_range(0..config.packages));
                let constraint = CONSTRAINT_POOL[rng.gen_range(0..CONSTRAINT_POOL.len())];
                deps.insert(target, json!(constraint));
            }

            clock += rng.gen_range(60_000..7_200_000);
            versions.insert(
                vtext.clone(),
                json!({"name": name, "version": vtext, "dependencies": deps}),
            );
            time.insert(vtext, json!(millis_to_rfc3339(clock)));
        }

        docs.push(json!({
            "name": name,
            "versions": versions,
            "time": time,
        }));
    }

    docs
}

fn millis_to_rfc3339(millis: i64) -> String {
    crate::time::format_ts(crate::time::from_millis(millis))
}
