//! On-disk certificate cache.
//!
//! One JSON file per key, `<n>-<lambda>-<method>-<seed|none>.json`. Writes go
//! to a temporary file in the same directory and are renamed into place.
//! Every load re-runs [`verify_cover`]; a file that fails to parse, does not
//! match its key, or no longer verifies is renamed to `*.quarantined` and
//! reported as a miss.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::construct::{verify_cover, CertificateRecord, CoverCertificate, Method};
use crate::error::{Error, Result};
use crate::graph::CoverageGraph;

pub const DEFAULT_CACHE_DIR: &str = "permcover-cache";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CacheKey {
    pub n: usize,
    pub lambda: u32,
    pub method: Method,
    pub seed: Option<u64>,
}

impl CacheKey {
    pub fn of(cert: &CoverCertificate) -> Self {
        CacheKey {
            n: cert.n,
            lambda: cert.lambda,
            method: cert.method,
            seed: cert.seed,
        }
    }

    pub fn file_name(&self) -> String {
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        format!("{}-{}-{}-{}.json", self.n, self.lambda, self.method, seed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CacheLoad {
    Hit(CoverCertificate),
    Miss,
    /// The entry existed but was unusable and has been moved aside.
    Quarantined { path: PathBuf, reason: String },
}

impl CacheLoad {
    pub fn warning(&self) -> Option<String> {
        match self {
            CacheLoad::Quarantined { path, reason } => {
                Some(format!("cache entry quarantined to {}: {reason}", path.display()))
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CertificateCache {
    dir: PathBuf,
}

impl CertificateCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        CertificateCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &CacheKey) -> PathBuf {
        self.dir.join(key.file_name())
    }

    /// Atomically writes `cert` under its own key.
    pub fn store(&self, cert: &CoverCertificate) -> Result<PathBuf> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path_for(&CacheKey::of(cert));
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir)?;
        serde_json::to_writer_pretty(&mut tmp, &cert.to_record())?;
        tmp.write_all(b"\n")?;
        tmp.as_file().sync_all()?;
        tmp.persist(&path).map_err(|e| Error::Io(e.error))?;
        Ok(path)
    }

    pub fn load(&self, g: &CoverageGraph, key: &CacheKey) -> Result<CacheLoad> {
        let path = self.path_for(key);
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(CacheLoad::Miss),
            Err(e) => return Err(e.into()),
        };
        match validate(g, key, &text) {
            Ok(cert) => Ok(CacheLoad::Hit(cert)),
            Err(reason) => {
                let mut aside = path.clone().into_os_string();
                aside.push(".quarantined");
                let aside = PathBuf::from(aside);
                fs::rename(&path, &aside)?;
                Ok(CacheLoad::Quarantined { path: aside, reason })
            }
        }
    }

    /// Keys of the entries stored for `(n, lambda)`, in file-name order.
    /// Nothing is read or validated.
    pub fn keys_for(&self, n: usize, lambda: u32) -> Result<Vec<CacheKey>> {
        let entries = match fs::read_dir(&self.dir) {
            Ok(e) => e,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e.into()),
        };
        let mut keys = Vec::new();
        for entry in entries {
            let name = entry?.file_name();
            if let Some(key) = name.to_str().and_then(parse_file_name) {
                if key.n == n && key.lambda == lambda {
                    keys.push((name, key));
                }
            }
        }
        keys.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(keys.into_iter().map(|(_, k)| k).collect())
    }

    /// Smallest valid cached certificate for `(g.n(), lambda)` over all
    /// methods and seeds, plus warnings for any entries quarantined on the way.
    pub fn best_known(&self, g: &CoverageGraph, lambda: u32) -> Result<(Option<CoverCertificate>, Vec<String>)> {
        let mut warnings = Vec::new();
        let mut best: Option<CoverCertificate> = None;
        for key in self.keys_for(g.n(), lambda)? {
            match self.load(g, &key)? {
                CacheLoad::Hit(cert) => {
                    if best.as_ref().is_none_or(|b| cert.size() < b.size()) {
                        best = Some(cert);
                    }
                }
                miss => warnings.extend(miss.warning()),
            }
        }
        Ok((best, warnings))
    }
}

impl Default for CertificateCache {
    fn default() -> Self {
        CertificateCache::new(DEFAULT_CACHE_DIR)
    }
}

fn parse_file_name(name: &str) -> Option<CacheKey> {
    let stem = name.strip_suffix(".json")?;
    let mut parts = stem.splitn(3, '-');
    let n = parts.next()?.parse().ok()?;
    let lambda = parts.next()?.parse().ok()?;
    // the method name itself may contain '-', the seed never does
    let (method, seed) = parts.next()?.rsplit_once('-')?;
    let seed = match seed {
        "none" => None,
        s => Some(s.parse().ok()?),
    };
    Some(CacheKey {
        n,
        lambda,
        method: method.parse().ok()?,
        seed,
    })
}

fn validate(g: &CoverageGraph, key: &CacheKey, text: &str) -> std::result::Result<CoverCertificate, String> {
    let rec: CertificateRecord = serde_json::from_str(text).map_err(|e| format!("unreadable: {e}"))?;
    let cert = CoverCertificate::from_record(&rec).map_err(|e| e.to_string())?;
    if CacheKey::of(&cert) != *key {
        return Err("contents do not match the file name".into());
    }
    if cert.n != g.n() {
        return Err(format!("certificate is for n = {}, graph is for n = {}", cert.n, g.n()));
    }
    if (cert.size() as u64) < cert.lower_bound {
        return Err(format!("size {} is below its own lower bound {}", cert.size(), cert.lower_bound));
    }
    match verify_cover(g, &cert.selected, cert.lambda) {
        Ok(v) if v.is_ok() => Ok(cert),
        Ok(_) => Err(format!("selection no longer covers every pattern {} times", cert.lambda)),
        Err(e) => Err(e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{alteration_cover, greedy_cover};

    #[test]
    fn file_names_round_trip() {
        for key in [
            CacheKey { n: 3, lambda: 1, method: Method::Exact, seed: None },
            CacheKey { n: 6, lambda: 2, method: Method::LambdaSample, seed: Some(17) },
        ] {
            assert_eq!(parse_file_name(&key.file_name()), Some(key));
        }
        assert_eq!(
            CacheKey { n: 6, lambda: 2, method: Method::LambdaSample, seed: Some(17) }.file_name(),
            "6-2-lambda-sample-17.json"
        );
        assert_eq!(parse_file_name("3-1-exact-none.json.quarantined"), None);
    }

    #[test]
    fn store_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let cache = CertificateCache::new(dir.path());
        let g = CoverageGraph::build(4).unwrap();
        let cert = greedy_cover(&g, 1).unwrap();
        let key = CacheKey::of(&cert);
        assert_eq!(cache.load(&g, &key).unwrap(), CacheLoad::Miss);
        cache.store(&cert).unwrap();
        let CacheLoad::Hit(back) = cache.load(&g, &key).unwrap() else {
            panic!("expected a hit");
        };
        assert_eq!(back.selected, cert.selected);
    }

    #[test]
    fn tampered_entry_is_quarantined() {
        let dir = tempfile::tempdir().unwrap();
        let cache = CertificateCache::new(dir.path());
        let g = CoverageGraph::build(3).unwrap();
        let cert = greedy_cover(&g, 1).unwrap();
        let path = cache.store(&cert).unwrap();

        let mut rec = cert.to_record();
        rec.selected.pop();
        rec.size -= 1;
        fs::write(&path, serde_json::to_string(&rec).unwrap()).unwrap();

        let load = cache.load(&g, &CacheKey::of(&cert)).unwrap();
        assert!(matches!(load, CacheLoad::Quarantined { .. }), "{load:?}");
        assert!(load.warning().is_some());
        assert!(!path.exists());
        assert_eq!(cache.load(&g, &CacheKey::of(&cert)).unwrap(), CacheLoad::Miss);
    }

    #[test]
    fn garbage_is_quarantined() {
        let dir = tempfile::tempdir().unwrap();
        let cache = CertificateCache::new(dir.path());
        let g = CoverageGraph::build(3).unwrap();
        let key = CacheKey { n: 3, lambda: 1, method: Method::Exact, seed: None };
        fs::write(cache.path_for(&key), "{not json").unwrap();
        assert!(matches!(cache.load(&g, &key).unwrap(), CacheLoad::Quarantined { .. }));
    }

    #[test]
    fn best_known_picks_smallest() {
        let dir = tempfile::tempdir().unwrap();
        let cache = CertificateCache::new(dir.path());
        let g = CoverageGraph::build(4).unwrap();
        assert!(cache.best_known(&g, 1).unwrap().0.is_none());
        let greedy = greedy_cover(&g, 1).unwrap();
        let alt = alteration_cover(&g, 5, None).unwrap();
        cache.store(&greedy).unwrap();
        cache.store(&alt).unwrap();
        let (best, warnings) = cache.best_known(&g, 1).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(best.unwrap().size(), greedy.size().min(alt.size()));
    }

    #[test]
    fn concurrent_stores_leave_a_valid_file() {
        let dir = tempfile::tempdir().unwrap();
        let cache = CertificateCache::new(dir.path());
        let g = CoverageGraph::build(4).unwrap();
        let cert = greedy_cover(&g, 1).unwrap();
        std::thread::scope(|s| {
            for _ in 0..8 {
                s.spawn(|| cache.store(&cert).unwrap());
            }
        });
        assert!(matches!(cache.load(&g, &CacheKey::of(&cert)).unwrap(), CacheLoad::Hit(_)));
        let leftovers = fs::read_dir(dir.path()).unwrap().count();
        assert_eq!(leftovers, 1);
    }
}
