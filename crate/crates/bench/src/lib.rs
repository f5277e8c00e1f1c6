//! Shared corpus setup for the criterion benchmarks.

use retrograde_core::store::Store;
use retrograde_core::synth::{synth_packuments, SynthConfig};

pub fn bench_store(packages: usize, versions_per_package: usize) -> (tempfile::TempDir, Store) {
    let dir = tempfile::TempDir::new().expect("temp dir");
    let mut store = Store::open(dir.path()).expect("open store");
    let docs = synth_packuments(&SynthConfig {
        seed: 20_26,
        packages,
        versions_per_package,
    });
    store.ingest_changes(docs).expect("ingest synthetic corpus");
    (dir, store)
}
