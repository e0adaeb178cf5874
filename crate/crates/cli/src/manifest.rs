use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "MANIFEST.json";

#[derive(Debug, Serialize, Deserialize)]
pub struct Entry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

fn walk(dir: &Path, acc: &mut Vec<PathBuf>) -> io::Result<()> {
    for entry in fs::read_dir(dir)? {
        let p = entry?.path();
        if p.is_dir() {
            walk(&p, acc)?;
        } else {
            acc.push(p);
        }
    }
    Ok(())
}

/// Lists every file under `root` (except the manifests) with its SHA-256.
pub fn entries(root: &Path) -> io::Result<Vec<Entry>> {
    let mut files = Vec::new();
    walk(root, &mut files)?;
    let mut out: Vec<Entry> = files
        .into_iter()
        .filter(|p| p.file_name().is_some_and(|n| n != MANIFEST))
        .map(|p| {
            let data = fs::read(&p)?;
            let rel = p.strip_prefix(root).unwrap_or(&p);
            let path = rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/");
            Ok(Entry {
                path,
                bytes: data.len() as u64,
                sha256: hex::encode(Sha256::digest(&data)),
            })
        })
        .collect::<io::Result<_>>()?;
    out.sort_by(|a, b| a.path.cmp(&b.path));
    Ok(out)
}

pub fn write_manifest(root: &Path) -> io::Result<()> {
    let files = entries(root)?;
    let mut s = serde_json::to_string_pretty(&serde_json::json!({ "files": files }))?;
    s.push('\n');
    fs::write(root.join(MANIFEST), s)
}
