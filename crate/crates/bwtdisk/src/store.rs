//! Backing storage for temp files, inputs and outputs: either files on disk
//! or memory buffers (internal mode). Every byte moved is counted in the
//! ledger; temp files are also charged for their size while they exist.

use std::fs::{File, OpenOptions};
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, MutexGuard};

use crate::ledger::SpaceLedger;

type Shared = Arc<Mutex<Vec<u8>>>;

fn lock(m: &Shared) -> MutexGuard<'_, Vec<u8>> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

#[derive(Debug, Clone)]
pub enum Medium {
    Disk(PathBuf),
    Memory,
}

#[derive(Debug)]
struct WsInner {
    medium: Medium,
    ledger: SpaceLedger,
    prefix: String,
}

/// Creates temp files with a run-unique prefix.
#[derive(Debug, Clone)]
pub struct Workspace(Arc<WsInner>);

impl Workspace {
    pub fn new(medium: Medium, ledger: SpaceLedger) -> Self {
        static RUN: AtomicU64 = AtomicU64::new(0);
        let prefix = format!("bwtdisk-{}-{}-", std::process::id(), RUN.fetch_add(1, Ordering::Relaxed));
        Workspace(Arc::new(WsInner { medium, ledger, prefix }))
    }

    pub fn memory(ledger: SpaceLedger) -> Self {
        Self::new(Medium::Memory, ledger)
    }

    pub fn disk(dir: impl Into<PathBuf>, ledger: SpaceLedger) -> Self {
        Self::new(Medium::Disk(dir.into()), ledger)
    }

    pub fn ledger(&self) -> &SpaceLedger {
        &self.0.ledger
    }

    pub fn medium(&self) -> &Medium {
        &self.0.medium
    }

    pub fn is_memory(&self) -> bool {
        matches!(self.0.medium, Medium::Memory)
    }

    /// A new empty temp file. It is deleted, and its space released, on drop.
    pub fn temp(&self, tag: &str) -> io::Result<Blob> {
        let backing = match &self.0.medium {
            Medium::Memory => Backing::Memory(Shared::default()),
            Medium::Disk(dir) => {
                let f = tempfile::Builder::new().prefix(&format!("{}{tag}-", self.0.prefix)).tempfile_in(dir)?;
                let (file, path) = f.into_parts();
                Backing::Temp(Arc::new(file), path)
            }
        };
        Ok(Blob { backing, size: Arc::new(AtomicU64::new(0)), ledger: self.0.ledger.clone(), charged: true })
    }
}

#[derive(Debug)]
enum Backing {
    Temp(Arc<File>, tempfile::TempPath),
    Path(Arc<File>, PathBuf),
    Memory(Shared),
}

/// A byte container with positioned readers and writers.
#[derive(Debug)]
pub struct Blob {
    backing: Backing,
    size: Arc<AtomicU64>,
    ledger: SpaceLedger,
    charged: bool,
}

impl Blob {
    /// An existing file, e.g. the input text. Not charged as temp space.
    pub fn open(path: &Path, ledger: &SpaceLedger) -> io::Result<Blob> {
        Self::with_file(File::open(path)?, path, ledger)
    }

    fn with_file(file: File, path: &Path, ledger: &SpaceLedger) -> io::Result<Blob> {
        let len = file.metadata()?.len();
        Ok(Blob {
            backing: Backing::Path(Arc::new(file), path.to_path_buf()),
            size: Arc::new(AtomicU64::new(len)),
            ledger: ledger.clone(),
            charged: false,
        })
    }

    /// Creates or truncates an output file. Not charged as temp space.
    pub fn create(path: &Path, ledger: &SpaceLedger) -> io::Result<Blob> {
        let file = OpenOptions::new().read(true).write(true).create(true).truncate(true).open(path)?;
        Self::with_file(file, path, ledger)
    }

    /// An uncharged memory buffer.
    pub fn from_vec(data: Vec<u8>, ledger: &SpaceLedger) -> Blob {
        Blob {
            size: Arc::new(AtomicU64::new(data.len() as u64)),
            backing: Backing::Memory(Arc::new(Mutex::new(data))),
            ledger: ledger.clone(),
            charged: false,
        }
    }

    pub fn len(&self) -> u64 {
        self.size.load(Ordering::Relaxed)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn path(&self) -> Option<&Path> {
        match &self.backing {
            Backing::Temp(_, p) => Some(p),
            Backing::Path(_, p) => Some(p),
            Backing::Memory(_) => None,
        }
    }

    /// Extends an uncharged blob to `len` bytes without writing them.
    pub fn reserve(&self, len: u64) -> io::Result<()> {
        assert!(!self.charged, "reserve is for output files");
        match &self.backing {
            Backing::Memory(m) => lock(m).resize(len as usize, 0),
            Backing::Temp(f, _) | Backing::Path(f, _) => f.set_len(len)?,
        }
        self.size.fetch_max(len, Ordering::Relaxed);
        Ok(())
    }

    pub fn reader_at(&self, pos: u64) -> io::Result<RawReader> {
        let src = match &self.backing {
            Backing::Memory(m) => Src::Mem(m.clone()),
            Backing::Temp(f, _) | Backing::Path(f, _) => Src::File(f.clone()),
        };
        Ok(RawReader { src, pos, ledger: self.ledger.clone() })
    }

    /// Writes starting at `pos`, overwriting and growing as needed.
    pub fn writer_at(&self, pos: u64) -> io::Result<RawWriter> {
        let dst = match &self.backing {
            Backing::Memory(m) => Src::Mem(m.clone()),
            Backing::Temp(f, _) | Backing::Path(f, _) => Src::File(f.clone()),
        };
        Ok(RawWriter { dst, pos, size: self.size.clone(), ledger: self.ledger.clone(), charged: self.charged })
    }

    pub fn read_all(&self) -> io::Result<Vec<u8>> {
        let mut out = Vec::with_capacity(self.len() as usize);
        self.reader_at(0)?.read_to_end(&mut out)?;
        Ok(out)
    }

    /// Copies the contents to a file.
    pub fn persist(&self, path: &Path) -> io::Result<()> {
        let mut r = self.reader_at(0)?;
        let mut f = File::create(path)?;
        let n = io::copy(&mut r, &mut f)?;
        self.ledger.add_written(n);
        Ok(())
    }
}

impl Drop for Blob {
    fn drop(&mut self) {
        if self.charged {
            self.ledger.charge(-(self.len() as i64));
        }
    }
}

#[derive(Debug)]
enum Src {
    File(Arc<File>),
    Mem(Shared),
}

#[cfg(unix)]
fn read_at(f: &File, buf: &mut [u8], at: u64) -> io::Result<usize> {
    std::os::unix::fs::FileExt::read_at(f, buf, at)
}

#[cfg(unix)]
fn write_at(f: &File, buf: &[u8], at: u64) -> io::Result<usize> {
    std::os::unix::fs::FileExt::write_at(f, buf, at)
}

#[cfg(windows)]
fn read_at(f: &File, buf: &mut [u8], at: u64) -> io::Result<usize> {
    std::os::windows::fs::FileExt::seek_read(f, buf, at)
}

#[cfg(windows)]
fn write_at(f: &File, buf: &[u8], at: u64) -> io::Result<usize> {
    std::os::windows::fs::FileExt::seek_write(f, buf, at)
}

/// Unbuffered positioned reader.
#[derive(Debug)]
pub struct RawReader {
    src: Src,
    pos: u64,
    ledger: SpaceLedger,
}

impl RawReader {
    pub fn seek_to(&mut self, pos: u64) -> io::Result<()> {
        self.pos = pos;
        Ok(())
    }

    pub fn position(&self) -> u64 {
        self.pos
    }
}

impl Read for RawReader {
    fn read(&mut self, buf: &mut [u8]) -> io::Result<usize> {
        let n = match &mut self.src {
            Src::File(f) => read_at(f, buf, self.pos)?,
            Src::Mem(m) => {
                let data = lock(m);
                let start = (self.pos as usize).min(data.len());
                let n = buf.len().min(data.len() - start);
                buf[..n].copy_from_slice(&data[start..start + n]);
                n
            }
        };
        self.pos += n as u64;
        self.ledger.add_read(n as u64);
        Ok(n)
    }
}

/// Unbuffered positioned writer.
#[derive(Debug)]
pub struct RawWriter {
    dst: Src,
    pos: u64,
    size: Arc<AtomicU64>,
    ledger: SpaceLedger,
    charged: bool,
}

impl RawWriter {
    pub fn position(&self) -> u64 {
        self.pos
    }
}

impl Write for RawWriter {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = match &mut self.dst {
            Src::File(f) => write_at(f, buf, self.pos)?,
            Src::Mem(m) => {
                let mut data = lock(m);
                let start = self.pos as usize;
                let end = start + buf.len();
                if data.len() < end {
                    data.resize(end, 0);
                }
                data[start..end].copy_from_slice(buf);
                buf.len()
            }
        };
        self.pos += n as u64;
        let size = self.size.load(Ordering::Relaxed);
        if self.pos > size {
            if self.charged {
                self.ledger.charge((self.pos - size) as i64);
            }
            self.size.store(self.pos, Ordering::Relaxed);
        }
        self.ledger.add_written(n as u64);
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        Ok(())
    }
}
