//! Binary cube (`HSC1`) and measurement (`HSM1`) files. All integers and
//! floats are little-endian; samples are stored as `f32`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use hypercs::datacube::Datacube;
use hypercs::sensing::Measurements;
use ndarray::Array2;

use crate::error::CliError;

pub const CUBE_MAGIC: &[u8; 4] = b"HSC1";
pub const MEASUREMENT_MAGIC: &[u8; 4] = b"HSM1";

fn to_u32(v: usize, what: &str) -> Result<u32, String> {
    u32::try_from(v).map_err(|_| format!("{what} = {v} does not fit in 32 bits"))
}

fn write_f32s<W: Write>(w: &mut W, values: impl Iterator<Item = f64>) -> std::io::Result<()> {
    for v in values {
        w.write_all(&(v as f32).to_le_bytes())?;
    }
    Ok(())
}

pub fn write_cube<W: Write>(w: &mut W, cube: &Datacube<f64>) -> Result<(), String> {
    let (n_v, n_h, n_s) = cube.dims();
    let mut buf = Vec::with_capacity(16 + 4 * cube.as_slice().len());
    buf.extend_from_slice(CUBE_MAGIC);
    for (v, name) in [(n_v, "n_v"), (n_h, "n_h"), (n_s, "n_s")] {
        buf.extend_from_slice(&to_u32(v, name)?.to_le_bytes());
    }
    write_f32s(&mut buf, cube.as_slice().iter().copied()).map_err(|e| e.to_string())?;
    w.write_all(&buf).map_err(|e| e.to_string())
}

/// Little-endian field reader over a byte buffer.
struct Fields<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Fields<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], String> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or("file is truncated")?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize, String> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }

    fn u64(&mut self) -> Result<u64, String> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, String> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f32s(&mut self, count: usize) -> Result<Vec<f64>, String> {
        let bytes = self.take(count.checked_mul(4).ok_or("payload size overflows")?)?;
        Ok(bytes.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64).collect())
    }

    fn magic(&mut self, want: &[u8; 4]) -> Result<(), String> {
        let got = self.take(4)?;
        if got != want {
            return Err(format!(
                "bad magic {:?}, expected {:?}",
                String::from_utf8_lossy(got),
                String::from_utf8_lossy(want)
            ));
        }
        Ok(())
    }

    fn finish(&self) -> Result<(), String> {
        if self.pos != self.bytes.len() {
            return Err(format!("{} trailing bytes after payload", self.bytes.len() - self.pos));
        }
        Ok(())
    }
}

pub fn parse_cube(bytes: &[u8]) -> Result<Datacube<f64>, String> {
    let mut f = Fields { bytes, pos: 0 };
    f.magic(CUBE_MAGIC)?;
    let (n_v, n_h, n_s) = (f.u32()?, f.u32()?, f.u32()?);
    let count = n_v.checked_mul(n_h).and_then(|p| p.checked_mul(n_s)).ok_or("cube size overflows")?;
    let data = f.f32s(count)?;
    f.finish()?;
    Datacube::new(n_v, n_h, n_s, data).map_err(|e| e.to_string())
}

pub fn write_measurements<W: Write>(w: &mut W, meas: &Measurements<f64>) -> Result<(), String> {
    let (n_v, n_h, n_s) = meas.cube_dims();
    let (sp, pp) = (&meas.spectral, &meas.spatial);
    let mut buf = Vec::with_capacity(64 + 4 * meas.y.len());
    buf.extend_from_slice(MEASUREMENT_MAGIC);
    for (v, name) in [
        (sp.m_s(), "m_s"),
        (pp.m_p(), "m_p"),
        (sp.q_s(), "q_s"),
        (pp.q_p(), "q_p"),
        (n_v, "n_v"),
        (n_h, "n_h"),
        (n_s, "n_s"),
    ] {
        buf.extend_from_slice(&to_u32(v, name)?.to_le_bytes());
    }
    for seed in [sp.seed(), pp.seed(), meas.noise_seed] {
        buf.extend_from_slice(&seed.to_le_bytes());
    }
    buf.extend_from_slice(&meas.sigma.to_le_bytes());
    write_f32s(&mut buf, meas.y.iter().copied()).map_err(|e| e.to_string())?;
    w.write_all(&buf).map_err(|e| e.to_string())
}

pub fn parse_measurements(bytes: &[u8]) -> Result<Measurements<f64>, String> {
    let mut f = Fields { bytes, pos: 0 };
    f.magic(MEASUREMENT_MAGIC)?;
    let (m_s, m_p, q_s, q_p) = (f.u32()?, f.u32()?, f.u32()?, f.u32()?);
    let (n_v, n_h, n_s) = (f.u32()?, f.u32()?, f.u32()?);
    let (spectral_seed, spatial_seed, noise_seed) = (f.u64()?, f.u64()?, f.u64()?);
    let sigma = f.f64()?;
    let count = m_s.checked_mul(m_p).ok_or("measurement size overflows")?;
    let y = f.f32s(count)?;
    f.finish()?;
    let y = Array2::from_shape_vec((m_s, m_p), y).map_err(|e| e.to_string())?;
    Measurements::from_parts(
        y,
        (n_v, n_h, n_s),
        (m_s, q_s, spectral_seed),
        (m_p, q_p, spatial_seed),
        sigma,
        noise_seed,
    )
    .map_err(|e| e.to_string())
}

fn read_all(path: &Path) -> Result<Vec<u8>, CliError> {
    let mut bytes = vec![];
    BufReader::new(File::open(path).map_err(CliError::io(path))?)
        .read_to_end(&mut bytes)
        .map_err(CliError::io(path))?;
    Ok(bytes)
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> Result<(), String>) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path).map_err(CliError::io(path))?);
    f(&mut w).map_err(|msg| CliError::Format { path: path.into(), msg })?;
    w.flush().map_err(CliError::io(path))
}

pub fn load_cube(path: &Path) -> Result<Datacube<f64>, CliError> {
    parse_cube(&read_all(path)?).map_err(|msg| CliError::Format { path: path.into(), msg })
}

pub fn save_cube(path: &Path, cube: &Datacube<f64>) -> Result<(), CliError> {
    write_file(path, |w| write_cube(w, cube))
}

pub fn load_measurements(path: &Path) -> Result<Measurements<f64>, CliError> {
    parse_measurements(&read_all(path)?).map_err(|msg| CliError::Format { path: path.into(), msg })
}

pub fn save_measurements(path: &Path, meas: &Measurements<f64>) -> Result<(), CliError> {
    write_file(path, |w| write_measurements(w, meas))
}
