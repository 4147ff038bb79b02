use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct CacheRecord {
    key: String,
    model: String,
    dim: usize,
    vec: Vec<f32>,
}

/// Append-only embedding store keyed by `(model, sha256(content))`.
///
/// On disk it is newline-delimited JSON; raw provider vectors are stored
/// (normalization happens when the index is built), and they reload
/// bit-for-bit.
pub struct EmbeddingCache {
    path: Option<PathBuf>,
    entries: HashMap<(String, String), Vec<f32>>,
    dims: HashMap<String, usize>,
    writer: Option<BufWriter<File>>,
}

impl EmbeddingCache {
    pub fn in_memory() -> Self {
        EmbeddingCache {
            path: None,
            entries: HashMap::new(),
            dims: HashMap::new(),
            writer: None,
        }
    }

    /// Opens (or creates on first write) the cache file at `path`.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut cache = EmbeddingCache::in_memory();
        if path.exists() {
            let reader = BufReader::new(File::open(&path)?);
            for (i, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let rec: CacheRecord = serde_json::from_str(&line)
                    .map_err(|e| Error::format(i + 1, format!("cache record: {e}")))?;
                if rec.key.len() != 64 || !rec.key.bytes().all(|b| b.is_ascii_hexdigit()) {
                    return Err(Error::format(
                        i + 1,
                        "cache key is not a 64-hex content hash",
                    ));
                }
                if rec.vec.len() != rec.dim {
                    return Err(Error::format(i + 1, "vector length does not match dim"));
                }
                cache
                    .check_dim(&rec.model, rec.dim)
                    .map_err(|e| Error::format(i + 1, e.to_string()))?;
                cache.entries.insert((rec.model, rec.key), rec.vec);
            }
        }
        cache.path = Some(path);
        Ok(cache)
    }

    pub fn get(&self, model: &str, key: &str) -> Option<&[f32]> {
        self.entries
            .get(&(model.to_string(), key.to_string()))
            .map(Vec::as_slice)
    }

    pub fn dim(&self, model: &str) -> Option<usize> {
        self.dims.get(model).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn check_dim(&mut self, model: &str, dim: usize) -> Result<()> {
        match self.dims.get(model) {
            Some(&d) if d != dim => Err(Error::Config(format!(
                "embedding dim {dim} for model `{model}` does not match cached dim {d}"
            ))),
            Some(_) => Ok(()),
            None => {
                self.dims.insert(model.to_string(), dim);
                Ok(())
            }
        }
    }

    pub fn insert(&mut self, model: &str, key: &str, vector: Vec<f32>) -> Result<()> {
        self.check_dim(model, vector.len())?;
        let k = (model.to_string(), key.to_string());
        if self.entries.get(&k) == Some(&vector) {
            return Ok(());
        }
        if let Some(path) = &self.path {
            if self.writer.is_none() {
                let file = OpenOptions::new().create(true).append(true).open(path)?;
                self.writer = Some(BufWriter::new(file));
            }
            let rec = CacheRecord {
                key: key.to_string(),
                model: model.to_string(),
                dim: vector.len(),
                vec: vector.clone(),
            };
            let writer = self.writer.as_mut().expect("opened above");
            serde_json::to_writer(&mut *writer, &rec).map_err(|e| Error::Io(e.into()))?;
            writer.write_all(b"\n")?;
        }
        self.entries.insert(k, vector);
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        if let Some(w) = self.writer.as_mut() {
            w.flush()?;
        }
        Ok(())
    }
}

impl Drop for EmbeddingCache {
    fn drop(&mut self) {
        let _ = self.flush();
    }
}
