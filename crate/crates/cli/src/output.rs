use std::fs::File;
use std::io::{self, BufWriter, Stdout, Write};
use std::path::{Path, PathBuf};

use crate::Failure;

/// An output destination: a file that is removed unless committed, or stdout.
pub enum Output {
    File { path: PathBuf, writer: Option<BufWriter<File>> },
    Stdout(BufWriter<Stdout>),
}

impl Output {
    pub fn create(path: Option<&Path>) -> Result<Self, Failure> {
        Ok(match path {
            Some(p) => {
                let file = File::create(p).map_err(|e| Failure::Domain(format!("cannot create {}: {e}", p.display())))?;
                Output::File { path: p.to_path_buf(), writer: Some(BufWriter::new(file)) }
            }
            None => Output::Stdout(BufWriter::new(io::stdout())),
        })
    }

    /// Flushes and keeps the output.
    pub fn commit(mut self) -> io::Result<()> {
        match &mut self {
            Output::File { writer, .. } => {
                let w = writer.take().expect("writer present until commit");
                w.into_inner().map_err(|e| e.into_error())?.sync_all()
            }
            Output::Stdout(w) => w.flush(),
        }
    }
}

impl Write for Output {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        match self {
            Output::File { writer, .. } => writer.as_mut().expect("writer present until commit").write(buf),
            Output::Stdout(w) => w.write(buf),
        }
    }

    fn flush(&mut self) -> io::Result<()> {
        match self {
            Output::File { writer, .. } => writer.as_mut().expect("writer present until commit").flush(),
            Output::Stdout(w) => w.flush(),
        }
    }
}

impl Drop for Output {
    fn drop(&mut self) {
        if let Output::File { path, writer: Some(_) } = self {
            let _ = std::fs::remove_file(path);
        }
    }
}
