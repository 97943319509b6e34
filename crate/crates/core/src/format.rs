//! Little-endian binary container shared by every `AIRN` file.
//!
//! All files start with the four magic bytes `AIRN`, a `u16` version and a
//! `u16` kind tag. Kind 1 holds sample buffers, kind 2 DBN models and kind 3
//! spectrum datasets.

use std::io::{Read, Write};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"AIRN";
pub const VERSION: u16 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u16)]
pub enum FileKind {
    SampleBuffer = 1,
    Model = 2,
    Dataset = 3,
}

pub fn write_header<W: Write>(w: &mut W, kind: FileKind) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(kind as u16).to_le_bytes())?;
    Ok(())
}

pub fn read_header<R: Read>(r: &mut R, kind: FileKind) -> Result<()> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic, expected AIRN".into()));
    }
    let version = read_u16(r)?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let found = read_u16(r)?;
    if found != kind as u16 {
        return Err(Error::Format(format!("expected file kind {}, found {found}", kind as u16)));
    }
    Ok(())
}

macro_rules! le_io {
    ($read:ident, $write:ident, $t:ty, $n:expr) => {
        pub fn $read<R: Read>(r: &mut R) -> Result<$t> {
            let mut b = [0u8; $n];
            r.read_exact(&mut b)?;
            Ok(<$t>::from_le_bytes(b))
        }

        pub fn $write<W: Write>(w: &mut W, v: $t) -> Result<()> {
            w.write_all(&v.to_le_bytes())?;
            Ok(())
        }
    };
}

le_io!(read_u8, write_u8, u8, 1);
le_io!(read_u16, write_u16, u16, 2);
le_io!(read_u32, write_u32, u32, 4);
le_io!(read_u64, write_u64, u64, 8);
le_io!(read_f32, write_f32, f32, 4);
le_io!(read_f64, write_f64, f64, 8);
