//! Append-only JSON-lines amendment journal.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use causeloom_core::hypergraph::Amendment;

use crate::{Result, ServiceError};

#[derive(Debug)]
pub struct Journal {
    path: PathBuf,
    file: File,
}

impl Journal {
    /// Opens (creating if needed) the journal and returns it with its
    /// entries. A final line without a newline is a write torn by a crash;
    /// it was never acknowledged, so it is cut off.
    pub fn open(path: &Path) -> Result<(Self, Vec<Amendment>)> {
        let io = |source| ServiceError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(path)
            .map_err(io)?;
        let mut entries = Vec::new();
        let mut reader = BufReader::new(&file);
        let mut line = String::new();
        let mut good_len = 0u64;
        let mut lineno = 0;
        loop {
            line.clear();
            let n = reader.read_line(&mut line).map_err(io)?;
            if n == 0 {
                break;
            }
            lineno += 1;
            if !line.ends_with('\n') {
                log::warn!("{}: dropping unterminated final line", path.display());
                break;
            }
            good_len += n as u64;
            if line.trim().is_empty() {
                continue;
            }
            let a: Amendment = serde_json::from_str(&line).map_err(|e| ServiceError::Journal {
                path: path.to_path_buf(),
                detail: format!("line {lineno}: {e}"),
            })?;
            let expected = entries.len() as u64 + 1;
            if a.seq != expected {
                return Err(ServiceError::Journal {
                    path: path.to_path_buf(),
                    detail: format!("line {lineno}: seq {} where {expected} was expected", a.seq),
                });
            }
            entries.push(a);
        }
        drop(reader);
        if file.metadata().map_err(io)?.len() != good_len {
            file.set_len(good_len).map_err(io)?;
            file.seek(SeekFrom::End(0)).map_err(io)?;
        }
        Ok((
            Self {
                path: path.to_path_buf(),
                file,
            },
            entries,
        ))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Writes one entry and flushes it to stable storage.
    pub fn append(&mut self, a: &Amendment) -> Result<()> {
        let mut line = serde_json::to_value(a).expect("amendment serializes").to_string();
        line.push('\n');
        let io = |source| ServiceError::Io {
            path: self.path.clone(),
            source,
        };
        self.file.write_all(line.as_bytes()).map_err(io)?;
        self.file.sync_data().map_err(io)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use causeloom_core::hypergraph::AmendAction;

    fn entry(seq: u64) -> Amendment {
        Amendment {
            seq,
            edge_id: format!("e{seq}"),
            action: AmendAction::FlipSign,
            author: "a".into(),
            ts: "t".into(),
        }
    }

    #[test]
    fn reopen_sees_appended_entries() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("j.jsonl");
        let (mut j, log) = Journal::open(&path).unwrap();
        assert!(log.is_empty());
        j.append(&entry(1)).unwrap();
        j.append(&entry(2)).unwrap();
        drop(j);
        let (_, log) = Journal::open(&path).unwrap();
        assert_eq!(log, vec![entry(1), entry(2)]);
    }

    #[test]
    fn torn_tail_is_truncated() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("j.jsonl");
        let (mut j, _) = Journal::open(&path).unwrap();
        j.append(&entry(1)).unwrap();
        drop(j);
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(b"{\"seq\":2,\"edge").unwrap();
        drop(f);
        let (mut j, log) = Journal::open(&path).unwrap();
        assert_eq!(log, vec![entry(1)]);
        j.append(&entry(2)).unwrap();
        drop(j);
        assert_eq!(Journal::open(&path).unwrap().1, vec![entry(1), entry(2)]);
    }

    #[test]
    fn gap_in_seq_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("j.jsonl");
        let (mut j, _) = Journal::open(&path).unwrap();
        j.append(&entry(1)).unwrap();
        j.append(&entry(3)).unwrap();
        drop(j);
        assert!(matches!(Journal::open(&path), Err(ServiceError::Journal { .. })));
    }
}
