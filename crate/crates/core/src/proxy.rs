//! Time-traveling registry proxy.
//!
//! Serves packuments filtered to a past instant so that an unmodified
//! npm client pointed at `http://host:port/t/{timestamp}/` resolves
//! dependencies against the registry state as of that instant. The
//! timestamp rides in the URL path, so one proxy serves all epochs
//! concurrently. Two backings: a local metadata store (hermetic), or an
//! upstream registry with an on-disk packument cache.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use axum::body::Body;
use axum::extract::{Path, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::Response;
use axum::routing::get;
use axum::Router;
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::semver::{compare_versions, parse_version, Version};
use crate::store::{PackageHistory, Store};
use crate::time::{format_ts, parse_ts, Timestamp};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProxyMode {
    Local,
    Upstream,
}

#[derive(Debug, Error)]
pub enum ProxyError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Config(String),
}

/// Shared proxy state behind the router.
pub struct ProxyApp {
    backing: Backing,
}

enum Backing {
    Local {
        store: Store,
        store_dir: PathBuf,
    },
    Upstream {
        client: reqwest::Client,
        base: String,
        cache_dir: PathBuf,
        locks: tokio::sync::Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>,
        hits: AtomicU64,
        misses: AtomicU64,
    },
}

impl ProxyApp {
    pub fn local(store: Store) -> ProxyApp {
        let store_dir = store.dir().to_path_buf();
        ProxyApp {
            backing: Backing::Local { store, store_dir },
        }
    }

    pub fn upstream(base: impl Into<String>, cache_dir: impl Into<PathBuf>) -> Result<ProxyApp, ProxyError> {
        let cache_dir = cache_dir.into();
        std::fs::create_dir_all(&cache_dir)?;
        let base = base.into().trim_end_matches('/').to_string();
        if base.is_empty() {
            return Err(ProxyError::Config("upstream URL must not be empty".into()));
        }
        Ok(ProxyApp {
            backing: Backing::Upstream {
                client: reqwest::Client::new(),
                base,
                cache_dir,
                locks: tokio::sync::Mutex::new(HashMap::new()),
                hits: AtomicU64::new(0),
                misses: AtomicU64::new(0),
            },
        })
    }

    pub fn mode(&self) -> ProxyMode {
        match self.backing {
            Backing::Local { .. } => ProxyMode::Local,
            Backing::Upstream { .. } => ProxyMode::Upstream,
        }
    }
}

pub fn router(app: Arc<ProxyApp>) -> Router {
    Router::new()
        .route("/-/health", get(health))
        .route("/t/{ts}/{*package}", get(packument))
        .with_state(app)
}

/// Bind and serve until the task is cancelled.
pub async fn serve(app: Arc<ProxyApp>, listen: SocketAddr) -> Result<(), ProxyError> {
    let listener = tokio::net::TcpListener::bind(listen).await?;
    serve_on(app, listener).await
}

/// Serve on an already-bound listener (lets callers report the address).
pub async fn serve_on(app: Arc<ProxyApp>, listener: tokio::net::TcpListener) -> Result<(), ProxyError> {
    axum::serve(listener, router(app))
        .await
        .map_err(|e| ProxyError::Io(std::io::Error::other(e)))
}

// ---------------------------------------------------------------------------
// Packument filtering
// ---------------------------------------------------------------------------

/// Build the packument served in local mode: exactly the non-deleted
/// versions published by `as_of`, a consistently filtered time map with
/// `modified` rewritten to the newest retained timestamp, and dist-tags
/// reconstructed (`latest` = highest retained release; other tags only
/// from recorded tag events at or before `as_of`).
pub fn build_local_packument(history: &PackageHistory, as_of: Timestamp) -> Option<Value> {
    let retained: Vec<_> = history
        .records
        .iter()
        .filter(|r| r.published_at <= as_of)
        .collect();
    if retained.is_empty() {
        return None;
    }

    let mut versions = Map::new();
    let mut time = Map::new();

    // Package creation time survives filtering untouched.
    let created = history
        .records
        .iter()
        .map(|r| r.published_at)
        .min()
        .expect("nonempty history");
    let modified = retained
        .iter()
        .map(|r| r.published_at)
        .max()
        .expect("nonempty retained set");
    time.insert("created".into(), json!(format_ts(created.min(modified))));
    time.insert("modified".into(), json!(format_ts(modified)));

    for record in &retained {
        let vtext = record.version.to_string();
        let mut vdoc = Map::new();
        vdoc.insert("name".into(), json!(record.package_name));
        vdoc.insert("version".into(), json!(vtext));
        let deps: Map<String, Value> = record
            .dependencies
            .iter()
            .map(|(k, v)| (k.clone(), json!(v.raw())))
            .collect();
        vdoc.insert("dependencies".into(), Value::Object(deps));
        if let Some(tarball) = &record.tarball_url {
            vdoc.insert("dist".into(), json!({ "tarball": tarball }));
        }
        versions.insert(vtext.clone(), Value::Object(vdoc));
        time.insert(vtext, json!(format_ts(record.published_at)));
    }

    let mut dist_tags = Map::new();
    if let Some(latest) = latest_release(retained.iter().map(|r| &r.version)) {
        dist_tags.insert("latest".into(), json!(latest.to_string()));
    }
    // Non-latest tags come only from recorded tag history.
    let mut tag_state: HashMap<&str, (&Version, Timestamp)> = HashMap::new();
    for event in &history.dist_tag_events {
        if event.at > as_of || event.tag == "latest" {
            continue;
        }
        let newer = tag_state
            .get(event.tag.as_str())
            .map(|(_, at)| event.at >= *at)
            .unwrap_or(true);
        if newer {
            tag_state.insert(&event.tag, (&event.version, event.at));
        }
    }
    for (tag, (version, _)) in tag_state {
        let retained_target = retained.iter().any(|r| &r.version == version);
        if retained_target {
            dist_tags.insert(tag.to_string(), json!(version.to_string()));
        }
    }

    let mut doc = Map::new();
    doc.insert("name".into(), json!(history.package_name));
    doc.insert("dist-tags".into(), Value::Object(dist_tags));
    doc.insert("versions".into(), Value::Object(versions));
    doc.insert("time".into(), Value::Object(time));
    Some(Value::Object(doc))
}

/// Rewrite an upstream packument in place of serving it: drop versions
/// published after `as_of`, filter the time map identically, rewrite
/// `modified`, and reconstruct `dist-tags.latest`. All other fields pass
/// through untouched.
pub fn filter_packument(doc: &Value, as_of: Timestamp) -> Option<Value> {
    let versions = doc.get("versions")?.as_object()?;
    let time = doc.get("time").and_then(Value::as_object)?;

    let mut retained: Vec<(String, Version, Timestamp)> = Vec::new();
    for vtext in versions.keys() {
        let Ok(version) = parse_version(vtext) else { continue };
        let Some(at) = time.get(vtext).and_then(Value::as_str).and_then(|t| parse_ts(t).ok())
        else {
            continue;
        };
        if at <= as_of {
            retained.push((vtext.clone(), version, at));
        }
    }
    if retained.is_empty() {
        return None;
    }

    let mut out = doc.as_object()?.clone();

    let mut new_versions = Map::new();
    for (vtext, _, _) in &retained {
        new_versions.insert(vtext.clone(), versions[vtext].clone());
    }
    out.insert("versions".into(), Value::Object(new_versions));

    let modified = retained.iter().map(|(_, _, at)| *at).max().expect("nonempty");
    let mut new_time = Map::new();
    if let Some(created) = time.get("created") {
        new_time.insert("created".into(), created.clone());
    }
    new_time.insert("modified".into(), json!(format_ts(modified)));
    for (vtext, _, at) in &retained {
        new_time.insert(vtext.clone(), json!(format_ts(*at)));
    }
    out.insert("time".into(), Value::Object(new_time));

    let mut dist_tags = Map::new();
    if let Some(latest) = latest_release(retained.iter().map(|(_, v, _)| v)) {
        dist_tags.insert("latest".into(), json!(latest.to_string()));
    }
    out.insert("dist-tags".into(), Value::Object(dist_tags));

    Some(Value::Object(out))
}

fn latest_release<'a>(versions: impl Iterator<Item = &'a Version>) -> Option<&'a Version> {
    versions
        .filter(|v| !v.is_prerelease())
        .max_by(|a, b| compare_versions(a, b))
}

// ---------------------------------------------------------------------------
// Handlers
// ---------------------------------------------------------------------------

async fn packument(
    State(app): State<Arc<ProxyApp>>,
    Path((ts, package)): Path<(String, String)>,
    headers: HeaderMap,
) -> Response {
    let Ok(as_of) = parse_ts(&ts) else {
        return error_response(
            StatusCode::BAD_REQUEST,
            &format!("malformed timestamp {ts:?}: expected RFC3339 or unix milliseconds"),
            &headers,
        );
    };
    let package = package.trim_matches('/').to_string();
    if package.is_empty() {
        return error_response(StatusCode::NOT_FOUND, "Not found", &headers);
    }

    let filtered = match &app.backing {
        Backing::Local { store, .. } => match store.history_as_of(&package, as_of) {
            Ok(history) => build_local_packument(&history, as_of),
            Err(crate::store::StoreError::UnknownPackage(_)) => None,
            Err(e) => {
                return error_response(StatusCode::SERVICE_UNAVAILABLE, &e.to_string(), &headers)
            }
        },
        Backing::Upstream { .. } => match upstream_packument(&app, &package).await {
            Ok(Some(doc)) => filter_packument(&doc, as_of),
            Ok(None) => None,
            Err(e) => return error_response(StatusCode::BAD_GATEWAY, &e, &headers),
        },
    };

    match filtered {
        Some(doc) => {
            let body = serde_json::to_vec(&doc).expect("packument serializes");
            json_response(StatusCode::OK, body, &headers)
        }
        None => error_response(StatusCode::NOT_FOUND, "Not found", &headers),
    }
}

async fn upstream_packument(app: &ProxyApp, package: &str) -> Result<Option<Value>, String> {
    let Backing::Upstream {
        client,
        base,
        cache_dir,
        locks,
        hits,
        misses,
    } = &app.backing
    else {
        unreachable!("upstream_packument called in local mode");
    };

    let cache_path = cache_dir.join(format!("{}.json", package.replace('/', "__")));

    // Single-flight per package: concurrent misses share one fetch.
    let lock = {
        let mut map = locks.lock().await;
        map.entry(package.to_string())
            .or_insert_with(|| Arc::new(tokio::sync::Mutex::new(())))
            .clone()
    };
    let _guard = lock.lock().await;

    if let Ok(bytes) = std::fs::read(&cache_path) {
        hits.fetch_add(1, Ordering::Relaxed);
        let doc = serde_json::from_slice(&bytes)
            .map_err(|e| format!("corrupt cache entry for {package}: {e}"))?;
        return Ok(Some(doc));
    }
    misses.fetch_add(1, Ordering::Relaxed);

    let url = format!("{}/{}", base, package.replace('/', "%2F"));
    let response = client
        .get(&url)
        .header(header::ACCEPT, "application/json")
        .send()
        .await
        .map_err(|e| format!("upstream request failed: {e}"))?;
    if response.status() == reqwest::StatusCode::NOT_FOUND {
        return Ok(None);
    }
    if !response.status().is_success() {
        return Err(format!("upstream returned {}", response.status()));
    }
    let bytes = response
        .bytes()
        .await
        .map_err(|e| format!("upstream body read failed: {e}"))?;
    let doc: Value =
        serde_json::from_slice(&bytes).map_err(|e| format!("upstream sent invalid JSON: {e}"))?;

    let tmp = cache_path.with_extension("json.tmp");
    std::fs::write(&tmp, &bytes).map_err(|e| format!("cache write failed: {e}"))?;
    std::fs::rename(&tmp, &cache_path).map_err(|e| format!("cache write failed: {e}"))?;

    Ok(Some(doc))
}

async fn health(State(app): State<Arc<ProxyApp>>, headers: HeaderMap) -> Response {
    let (status, body) = match &app.backing {
        Backing::Local { store, store_dir } => {
            if store_dir.is_dir() {
                (
                    StatusCode::OK,
                    json!({
                        "mode": "local",
                        "packages": store.package_count(),
                        "records": store.record_count(),
                        "newestRecord": store.newest_publish_time().map(format_ts),
                    }),
                )
            } else {
                (
                    StatusCode::SERVICE_UNAVAILABLE,
                    json!({"mode": "local", "error": "store directory is gone"}),
                )
            }
        }
        Backing::Upstream {
            base,
            cache_dir,
            hits,
            misses,
            ..
        } => {
            if cache_dir.is_dir() {
                let entries = std::fs::read_dir(cache_dir)
                    .map(|d| d.filter_map(Result::ok).count())
                    .unwrap_or(0);
                (
                    StatusCode::OK,
                    json!({
                        "mode": "upstream",
                        "upstream": base,
                        "cacheEntries": entries,
                        "cacheHits": hits.load(Ordering::Relaxed),
                        "cacheMisses": misses.load(Ordering::Relaxed),
                    }),
                )
            } else {
                (
                    StatusCode::SERVICE_UNAVAILABLE,
                    json!({"mode": "upstream", "error": "cache directory is gone"}),
                )
            }
        }
    };
    json_response(status, serde_json::to_vec(&body).expect("health serializes"), &headers)
}

fn error_response(status: StatusCode, message: &str, headers: &HeaderMap) -> Response {
    let body = serde_json::to_vec(&json!({ "error": message })).expect("error serializes");
    json_response(status, body, headers)
}

fn wants_gzip(headers: &HeaderMap) -> bool {
    headers
        .get(header::ACCEPT_ENCODING)
        .and_then(|v| v.to_str().ok())
        .map(|v| v.split(',').any(|enc| enc.trim().starts_with("gzip")))
        .unwrap_or(false)
}

fn json_response(status: StatusCode, body: Vec<u8>, request_headers: &HeaderMap) -> Response {
    let mut builder = Response::builder()
        .status(status)
        .header(header::CONTENT_TYPE, "application/json");
    let body = if wants_gzip(request_headers) {
        use flate2::write::GzEncoder;
        use std::io::Write;
        let mut enc = GzEncoder::new(Vec::new(), flate2::Compression::default());
        enc.write_all(&body).expect("gzip in-memory write");
        builder = builder.header(header::CONTENT_ENCODING, "gzip");
        enc.finish().expect("gzip in-memory finish")
    } else {
        body
    };
    builder.body(Body::from(body)).expect("response builds")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::store::Store;
    use serde_json::json;
    use tempfile::TempDir;

    fn t(s: &str) -> Timestamp {
        parse_ts(s).unwrap()
    }

    fn fixture_history(dir: &TempDir) -> Store {
        let mut store = Store::open(dir.path()).unwrap();
        store
            .ingest_changes([json!({
                "name": "lib",
                "versions": {
                    "1.0.0": {"name": "lib", "version": "1.0.0", "dependencies": {},
                               "dist": {"tarball": "https://registry.example/lib-1.0.0.tgz"}},
                    "1.1.0": {"name": "lib", "version": "1.1.0", "dependencies": {"a": "^1.0.0"}},
                    "2.0.0": {"name": "lib", "version": "2.0.0", "dependencies": {}}
                },
                "time": {
                    "1.0.0": "2020-01-01T00:00:00Z",
                    "1.1.0": "2020-02-01T00:00:00Z",
                    "2.0.0": "2020-03-01T00:00:00Z"
                },
                "dist-tags": {"latest": "2.0.0", "next": "2.0.0"}
            })])
            .unwrap();
        store
    }

    #[test]
    fn local_packument_filters_versions_and_tags() {
        let dir = TempDir::new().unwrap();
        let store = fixture_history(&dir);
        let history = store
            .history_as_of("lib", t("2020-02-15T00:00:00Z"))
            .unwrap();
        let doc = build_local_packument(&history, t("2020-02-15T00:00:00Z")).unwrap();

        let versions: Vec<&String> = doc["versions"].as_object().unwrap().keys().collect();
        assert_eq!(versions, vec!["1.0.0", "1.1.0"]);
        assert_eq!(doc["dist-tags"]["latest"], "1.1.0");
        assert_eq!(doc["time"]["modified"], "2020-02-01T00:00:00.000Z");
        assert_eq!(doc["time"]["created"], "2020-01-01T00:00:00.000Z");
        assert!(doc["time"].get("2.0.0").is_none());
        // The "next" tag event (recorded at 2.0.0's publish time) is
        // after the cut: dropped.
        assert!(doc["dist-tags"].get("next").is_none());
        assert_eq!(
            doc["versions"]["1.0.0"]["dist"]["tarball"],
            "https://registry.example/lib-1.0.0.tgz"
        );
    }

    #[test]
    fn empty_filter_yields_none() {
        let dir = TempDir::new().unwrap();
        let store = fixture_history(&dir);
        let history = store.history_as_of("lib", t("2019-01-01T00:00:00Z")).unwrap();
        assert!(build_local_packument(&history, t("2019-01-01T00:00:00Z")).is_none());
    }

    #[test]
    fn full_history_keeps_everything_and_recomputes_latest() {
        let dir = TempDir::new().unwrap();
        let store = fixture_history(&dir);
        let when = t("2021-01-01T00:00:00Z");
        let history = store.history_as_of("lib", when).unwrap();
        let doc = build_local_packument(&history, when).unwrap();
        assert_eq!(doc["versions"].as_object().unwrap().len(), 3);
        assert_eq!(doc["dist-tags"]["latest"], "2.0.0");
        assert_eq!(doc["dist-tags"]["next"], "2.0.0");
    }

    #[test]
    fn prerelease_never_becomes_latest() {
        let dir = TempDir::new().unwrap();
        let mut store = Store::open(dir.path()).unwrap();
        store
            .ingest_changes([json!({
                "name": "pre",
                "versions": {
                    "1.0.0": {"name": "pre", "version": "1.0.0"},
                    "2.0.0-rc.1": {"name": "pre", "version": "2.0.0-rc.1"}
                },
                "time": {
                    "1.0.0": "2020-01-01T00:00:00Z",
                    "2.0.0-rc.1": "2020-02-01T00:00:00Z"
                }
            })])
            .unwrap();
        let when = t("2020-06-01T00:00:00Z");
        let history = store.history_as_of("pre", when).unwrap();
        let doc = build_local_packument(&history, when).unwrap();
        assert_eq!(doc["dist-tags"]["latest"], "1.0.0");
    }

    #[test]
    fn upstream_rewrite_preserves_extra_fields() {
        let doc = json!({
            "name": "lib",
            "description": "passes through",
            "readme": "hello",
            "versions": {
                "1.0.0": {"name": "lib", "version": "1.0.0", "dist": {"tarball": "https://x/1.tgz"}},
                "2.0.0": {"name": "lib", "version": "2.0.0", "dist": {"tarball": "https://x/2.tgz"}}
            },
            "time": {
                "created": "2019-12-30T00:00:00Z",
                "modified": "2020-03-01T00:00:00Z",
                "1.0.0": "2020-01-01T00:00:00Z",
                "2.0.0": "2020-03-01T00:00:00Z"
            },
            "dist-tags": {"latest": "2.0.0", "beta": "2.0.0"}
        });
        let filtered = filter_packument(&doc, t("2020-02-01T00:00:00Z")).unwrap();
        assert_eq!(filtered["description"], "passes through");
        assert_eq!(filtered["versions"].as_object().unwrap().len(), 1);
        assert_eq!(filtered["dist-tags"]["latest"], "1.0.0");
        assert!(filtered["dist-tags"].get("beta").is_none());
        assert_eq!(filtered["time"]["modified"], "2020-01-01T00:00:00.000Z");
        assert_eq!(filtered["time"]["created"], "2019-12-30T00:00:00Z");
        // Tarball URLs pass through unmodified.
        assert_eq!(filtered["versions"]["1.0.0"]["dist"]["tarball"], "https://x/1.tgz");

        assert!(filter_packument(&doc, t("2019-01-01T00:00:00Z")).is_none());
    }
}
