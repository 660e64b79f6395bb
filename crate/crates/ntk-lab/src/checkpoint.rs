//! Network checkpoint files: a JSON header followed by raw little-endian
//! doubles.
//!
//! Layout:
//!
//! ```text
//! bytes 0..8    magic "NTKCKPT1"
//! bytes 8..16   header length H, u64 little-endian
//! bytes 16..16+H JSON header: {"config": NetworkConfig, "step": k,
//!                              "param_count": M}
//! remainder     M doubles, little-endian, in the documented parameter
//!               flattening order (copy 1 then copy 2; per copy: first-layer
//!               weights row-major, bias, hidden layers row-major, output row)
//! ```

use crate::error::{Error, Result};
use crate::network::{NetworkConfig, NetworkParams};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"NTKCKPT1";

#[derive(Serialize, Deserialize)]
struct CheckpointHeader {
    config: NetworkConfig,
    step: usize,
    param_count: usize,
}

/// Writes parameters and the training step they were captured at.
pub fn save_checkpoint(path: &Path, params: &NetworkParams, step: usize) -> Result<()> {
    let flat = params.flatten();
    let header = serde_json::to_vec(&CheckpointHeader {
        config: params.config.clone(),
        step,
        param_count: flat.len(),
    })?;
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    file.write_all(CHECKPOINT_MAGIC)?;
    file.write_all(&(header.len() as u64).to_le_bytes())?;
    file.write_all(&header)?;
    for v in &flat {
        file.write_all(&v.to_le_bytes())?;
    }
    file.flush()?;
    Ok(())
}

/// Reads a checkpoint back; returns the parameters and the recorded step.
pub fn load_checkpoint(path: &Path) -> Result<(NetworkParams, usize)> {
    let mut file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut magic = [0u8; 8];
    file.read_exact(&mut magic)
        .map_err(|_| Error::Checkpoint("file too short for magic".into()))?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint(format!(
            "bad magic {:?}; not a checkpoint file",
            String::from_utf8_lossy(&magic)
        )));
    }
    let mut len_bytes = [0u8; 8];
    file.read_exact(&mut len_bytes)
        .map_err(|_| Error::Checkpoint("file too short for header length".into()))?;
    let header_len = u64::from_le_bytes(len_bytes) as usize;
    let mut header_bytes = vec![0u8; header_len];
    file.read_exact(&mut header_bytes)
        .map_err(|_| Error::Checkpoint("truncated header".into()))?;
    let header: CheckpointHeader = serde_json::from_slice(&header_bytes)?;
    if header.param_count != header.config.total_params() {
        return Err(Error::Checkpoint(format!(
            "header declares {} parameters but the config needs {}",
            header.param_count,
            header.config.total_params()
        )));
    }
    let mut flat = vec![0.0f64; header.param_count];
    let mut buf = [0u8; 8];
    for v in flat.iter_mut() {
        file.read_exact(&mut buf)
            .map_err(|_| Error::Checkpoint("truncated parameter data".into()))?;
        *v = f64::from_le_bytes(buf);
    }
    let mut trailing = [0u8; 1];
    if file.read(&mut trailing)? != 0 {
        return Err(Error::Checkpoint("trailing bytes after parameter data".into()));
    }
    let params = NetworkParams::unflatten(&header.config, &flat)?;
    Ok((params, header.step))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{init_params, InitMode, NetworkConfig};

    fn cfg(mode: InitMode) -> NetworkConfig {
        NetworkConfig::uniform(3, 2, 8, mode, true, 99)
    }

    #[test]
    fn roundtrip_both_modes() {
        let dir = tempfile::tempdir().unwrap();
        for mode in [InitMode::Standard, InitMode::Mirrored] {
            let p = init_params(&cfg(mode)).unwrap();
            let path = dir.path().join(format!("{mode}.ckpt"));
            save_checkpoint(&path, &p, 17).unwrap();
            let (q, step) = load_checkpoint(&path).unwrap();
            assert_eq!(step, 17);
            assert_eq!(p.flatten(), q.flatten(), "bit-exact parameter roundtrip");
            assert_eq!(p.config.widths, q.config.widths);
            assert_eq!(p.config.init_mode, q.config.init_mode);
        }
    }

    #[test]
    fn rejects_bad_magic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.ckpt");
        std::fs::write(&path, b"NOTACKPTxxxxxxxxxxxx").unwrap();
        match load_checkpoint(&path) {
            Err(Error::Checkpoint(msg)) => assert!(msg.contains("magic"), "{msg}"),
            other => panic!("expected checkpoint error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_truncation_and_trailing_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.ckpt");
        let p = init_params(&cfg(InitMode::Standard)).unwrap();
        save_checkpoint(&path, &p, 0).unwrap();
        let bytes = std::fs::read(&path).unwrap();

        let cut = dir.path().join("cut.ckpt");
        std::fs::write(&cut, &bytes[..bytes.len() - 4]).unwrap();
        assert!(matches!(load_checkpoint(&cut), Err(Error::Checkpoint(_))));

        let long = dir.path().join("long.ckpt");
        let mut extended = bytes.clone();
        extended.extend_from_slice(&[0u8; 8]);
        std::fs::write(&long, &extended).unwrap();
        assert!(matches!(load_checkpoint(&long), Err(Error::Checkpoint(_))));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_checkpoint(Path::new("/nonexistent/x.ckpt")),
            Err(Error::Io(_))
        ));
    }
}
