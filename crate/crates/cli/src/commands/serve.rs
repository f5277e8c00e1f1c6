//! `retrograde serve`: run the time-traveling registry proxy.

use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Serialize;

use retrograde_core::proxy::{serve_on, ProxyApp};
use retrograde_core::store::Store;

use crate::manifest::RunTracker;
use crate::{ManifestArgs, Outcome, StoreArgs};

#[derive(Args, Serialize, Clone)]
pub struct ServeArgs {
    /// Address to bind, e.g. 127.0.0.1:8742 (port 0 picks one).
    #[arg(long, default_value = "127.0.0.1:8742")]
    pub listen: String,
    /// Backing mode: `local` serves the store, `upstream` rewrites a live
    /// registry with an on-disk cache.
    #[arg(long, default_value = "local", value_parser = ["local", "upstream"])]
    pub mode: String,
    /// Upstream registry base URL (upstream mode).
    #[arg(long, required_if_eq("mode", "upstream"))]
    pub upstream: Option<String>,
    /// Packument cache directory (upstream mode).
    #[arg(long, required_if_eq("mode", "upstream"))]
    pub cache_dir: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub store: StoreArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub manifest: ManifestArgs,
}

pub fn run(args: ServeArgs) -> Result<Outcome> {
    let mut tracker = RunTracker::new("serve", &args)?;

    let app = match args.mode.as_str() {
        "local" => {
            let store = Store::open(&args.store.store).context("open store")?;
            tracker.input(&args.store.store);
            tracker.set_count("packages", store.package_count() as u64);
            tracker.set_count("records", store.record_count() as u64);
            ProxyApp::local(store)
        }
        "upstream" => {
            let upstream = args.upstream.clone().expect("required by clap");
            let cache_dir = args.cache_dir.clone().expect("required by clap");
            tracker.input(&cache_dir);
            ProxyApp::upstream(upstream, cache_dir)?
        }
        other => bail!("unknown mode {other:?}"),
    };

    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .context("start async runtime")?;

    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&args.listen)
            .await
            .with_context(|| format!("bind {}", args.listen))?;
        let addr = listener.local_addr()?;
        // Announce the bound address on stdout so wrappers can find an
        // ephemeral port.
        println!("listening on http://{addr}");
        use std::io::Write;
        std::io::stdout().flush().ok();

        // A manifest checkpoint at startup; rewritten on clean shutdown.
        tracker.write(args.manifest.run_manifest.as_deref())?;

        let app = Arc::new(app);
        tokio::select! {
            result = serve_on(app, listener) => {
                result.context("proxy server")?;
            }
            _ = tokio::signal::ctrl_c() => {
                eprintln!("serve: shutting down");
            }
        }
        tracker.write(args.manifest.run_manifest.as_deref())?;
        Ok::<_, anyhow::Error>(())
    })?;

    Ok(Outcome::clean())
}
