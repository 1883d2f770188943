//! Content-addressed PNG storage.

use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;
use std::sync::RwLock;

use crate::error::Result;
use crate::ids::ImageId;

#[derive(Debug)]
pub struct ImageStore {
    dir: Option<PathBuf>,
    mem: RwLock<HashMap<ImageId, Vec<u8>>>,
}

impl ImageStore {
    pub fn in_memory() -> Self {
        ImageStore {
            dir: None,
            mem: RwLock::new(HashMap::new()),
        }
    }

    pub fn on_disk(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(ImageStore {
            dir: Some(dir),
            mem: RwLock::new(HashMap::new()),
        })
    }

    pub fn put(&self, bytes: &[u8]) -> Result<ImageId> {
        let id = ImageId::of_bytes(bytes);
        match &self.dir {
            Some(dir) => {
                let path = dir.join(format!("{id}.png"));
                if !path.exists() {
                    let tmp = dir.join(format!("{id}.png.tmp"));
                    fs::write(&tmp, bytes)?;
                    fs::rename(tmp, path)?;
                }
            }
            None => {
                self.mem.write().expect("store lock").entry(id.clone()).or_insert_with(|| bytes.to_vec());
            }
        }
        Ok(id)
    }

    pub fn get(&self, id: &ImageId) -> Option<Vec<u8>> {
        if !ImageId::is_well_formed(id.as_str()) {
            return None;
        }
        match &self.dir {
            Some(dir) => fs::read(dir.join(format!("{id}.png"))).ok(),
            None => self.mem.read().expect("store lock").get(id).cloned(),
        }
    }

    pub fn contains(&self, id: &ImageId) -> bool {
        match &self.dir {
            Some(dir) => ImageId::is_well_formed(id.as_str()) && dir.join(format!("{id}.png")).exists(),
            None => self.mem.read().expect("store lock").contains_key(id),
        }
    }
}
