use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Dataset, DatasetManifest, SampleRecord};
use crate::error::{Error, Result};
use crate::io::{read_cochleagram, read_json, sidecar_path, write_cochleagram, write_json, CochleagramMeta};

pub const MANIFEST: &str = "manifest.json";

#[derive(Serialize, Deserialize)]
struct SampleSidecar {
    #[serde(flatten)]
    meta: CochleagramMeta,
    record: SampleRecord,
}

impl Dataset {
    /// Writes `manifest.json` and `samples/NNNN.f32` (+ `.json`) under `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        let samples = dir.join("samples");
        fs::create_dir_all(&samples).map_err(|e| Error::io(&samples, e))?;
        for (rec, cg) in self.manifest.samples.iter().zip(&self.cochleagrams) {
            let path = dir.join(&rec.file);
            write_cochleagram(&path, cg)?;
            let sidecar = SampleSidecar { meta: CochleagramMeta::of(cg), record: rec.clone() };
            write_json(&sidecar_path(&path), &sidecar)?;
        }
        write_json(&dir.join(MANIFEST), &self.manifest)
    }

    /// Reads a corpus back, checking the stored hash against its config.
    pub fn load(dir: &Path) -> Result<Dataset> {
        let manifest = DatasetManifest::load(dir)?;
        let cochleagrams = manifest
            .samples
            .par_iter()
            .map(|rec| read_cochleagram(&dir.join(&rec.file)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset { manifest, cochleagrams })
    }
}

impl DatasetManifest {
    pub fn load(dir: &Path) -> Result<DatasetManifest> {
        let manifest: DatasetManifest = read_json(&dir.join(MANIFEST))?;
        if manifest.config.hash() != manifest.config_hash {
            return Err(Error::data(format!(
                "{}: config hash does not match its config",
                dir.join(MANIFEST).display()
            )));
        }
        Ok(manifest)
    }
}
