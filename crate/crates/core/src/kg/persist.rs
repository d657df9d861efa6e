use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{KgError, KnowledgeGraph};

/// First bytes of every persisted index.
pub const MAGIC: &[u8; 8] = b"RLKGIDX\0";
/// Bumped whenever the serialized layout changes.
pub const FORMAT_VERSION: u32 = 1;

impl KnowledgeGraph {
    /// Magic header, little-endian format version, then the bincode body.
    /// Output is a pure function of the index contents.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), bincode::Error> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        bincode::serialize_into(&mut w, self)?;
        w.flush()?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), KgError> {
        let path = path.as_ref();
        let display = path.display().to_string();
        let file = File::create(path).map_err(|source| KgError::Io { path: display.clone(), source })?;
        self.write_to(BufWriter::new(file)).map_err(|source| KgError::Codec { path: display, source })
    }

    pub fn read_from<R: Read>(mut r: R, path: &str) -> Result<Self, KgError> {
        let io_err = |source| KgError::Io { path: path.to_string(), source };
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(|e| match e.kind() {
            std::io::ErrorKind::UnexpectedEof => KgError::BadMagic { path: path.to_string() },
            _ => io_err(e),
        })?;
        if &magic != MAGIC {
            return Err(KgError::BadMagic { path: path.to_string() });
        }
        let mut version = [0u8; 4];
        r.read_exact(&mut version).map_err(io_err)?;
        let found = u32::from_le_bytes(version);
        if found != FORMAT_VERSION {
            return Err(KgError::VersionMismatch { path: path.to_string(), found, expected: FORMAT_VERSION });
        }
        bincode::deserialize_from(r).map_err(|source| KgError::Codec { path: path.to_string(), source })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, KgError> {
        let path = path.as_ref();
        let display = path.display().to_string();
        let file = File::open(path).map_err(|source| KgError::Io { path: display.clone(), source })?;
        Self::read_from(BufReader::new(file), &display)
    }
}
