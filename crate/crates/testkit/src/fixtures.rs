//! Packument and tarball fixture builders.

use serde_json::{json, Map, Value};

/// Builds packument JSON documents the way the registry emits them.
pub struct PackumentBuilder {
    name: String,
    versions: Map<String, Value>,
    time: Map<String, Value>,
    dist_tags: Map<String, Value>,
}

impl PackumentBuilder {
    pub fn new(name: &str) -> PackumentBuilder {
        PackumentBuilder {
            name: name.to_string(),
            versions: Map::new(),
            time: Map::new(),
            dist_tags: Map::new(),
        }
    }

    pub fn version(mut self, version: &str, published_at: &str, deps: &[(&str, &str)]) -> Self {
        let dep_obj: Map<String, Value> = deps
            .iter()
            .map(|(d, c)| (d.to_string(), json!(c)))
            .collect();
        self.versions.insert(
            version.to_string(),
            json!({
                "name": self.name,
                "version": version,
                "dependencies": dep_obj,
            }),
        );
        self.time.insert(version.to_string(), json!(published_at));
        self
    }

    pub fn tarball(mut self, version: &str, url: &str) -> Self {
        if let Some(vdoc) = self.versions.get_mut(version) {
            vdoc["dist"] = json!({ "tarball": url });
        }
        self
    }

    pub fn dist_tag(mut self, tag: &str, version: &str) -> Self {
        self.dist_tags.insert(tag.to_string(), json!(version));
        self
    }

    pub fn build(self) -> Value {
        json!({
            "name": self.name,
            "versions": self.versions,
            "time": self.time,
            "dist-tags": self.dist_tags,
        })
    }
}

/// A gzip-compressed registry-style tarball with the uniform `package/`
/// root directory.
pub fn build_tarball(files: &[(&str, &[u8])]) -> Vec<u8> {
    let gz = flate2::write::GzEncoder::new(Vec::new(), flate2::Compression::default());
    let mut builder = tar::Builder::new(gz);
    for (path, contents) in files {
        let mut header = tar::Header::new_gnu();
        header.set_size(contents.len() as u64);
        header.set_mode(0o644);
        header.set_mtime(0);
        header.set_cksum();
        builder
            .append_data(&mut header, format!("package/{path}"), *contents)
            .expect("in-memory tar append");
    }
    builder
        .into_inner()
        .expect("finish tar")
        .finish()
        .expect("finish gzip")
}
