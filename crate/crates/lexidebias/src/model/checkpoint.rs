//! Model checkpoint file: a versioned header `(magic, version, n, m)`
//! followed by the six tensors row-major as 8-byte little-endian floats, in
//! the order encoder weights/bias, reconstruction weights/bias, definition
//! weights/bias.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use super::ModelParams;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"LDBM";
const VERSION: u32 = 1;

pub fn save_checkpoint(params: &ModelParams, path: impl AsRef<Path>) -> Result<()> {
    let path_str = path.as_ref().display().to_string();
    let file = File::create(path.as_ref()).map_err(|e| Error::io(&path_str, e))?;
    let mut out = BufWriter::new(file);
    let io_err = |e: std::io::Error| Error::io(&path_str, e);

    out.write_all(MAGIC).map_err(io_err)?;
    out.write_all(&VERSION.to_le_bytes()).map_err(io_err)?;
    out.write_all(&(params.input_dim() as u64).to_le_bytes()).map_err(io_err)?;
    out.write_all(&(params.encoded_dim() as u64).to_le_bytes()).map_err(io_err)?;
    for value in params
        .enc_w
        .iter()
        .chain(params.enc_b.iter())
        .chain(params.rec_w.iter())
        .chain(params.rec_b.iter())
        .chain(params.def_w.iter())
        .chain(params.def_b.iter())
    {
        out.write_all(&value.to_le_bytes()).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<ModelParams> {
    let path_str = path.as_ref().display().to_string();
    let file = File::open(path.as_ref()).map_err(|e| Error::io(&path_str, e))?;
    let mut input = BufReader::new(file);
    let io_err = |e: std::io::Error| Error::io(&path_str, e);

    let mut magic = [0u8; 4];
    input.read_exact(&mut magic).map_err(io_err)?;
    if &magic != MAGIC {
        return Err(Error::Data(format!("{path_str}: not a model checkpoint")));
    }
    let mut word = [0u8; 4];
    input.read_exact(&mut word).map_err(io_err)?;
    let version = u32::from_le_bytes(word);
    if version != VERSION {
        return Err(Error::Data(format!(
            "{path_str}: unsupported checkpoint version {version}"
        )));
    }
    let mut long = [0u8; 8];
    input.read_exact(&mut long).map_err(io_err)?;
    let n = u64::from_le_bytes(long) as usize;
    input.read_exact(&mut long).map_err(io_err)?;
    let m = u64::from_le_bytes(long) as usize;
    if n == 0 || m == 0 || m > n {
        return Err(Error::Data(format!("{path_str}: invalid dimensions n={n}, m={m}")));
    }

    let mut read_values = |count: usize| -> Result<Vec<f64>> {
        let mut values = Vec::with_capacity(count);
        let mut buf = [0u8; 8];
        for _ in 0..count {
            input.read_exact(&mut buf).map_err(|e| Error::io(&path_str, e))?;
            let v = f64::from_le_bytes(buf);
            if !v.is_finite() {
                return Err(Error::Data(format!("{path_str}: non-finite parameter value")));
            }
            values.push(v);
        }
        Ok(values)
    };

    let enc_w = Array2::from_shape_vec((m, n), read_values(m * n)?).expect("shape checked");
    let enc_b = Array1::from(read_values(m)?);
    let rec_w = Array2::from_shape_vec((n, m), read_values(n * m)?).expect("shape checked");
    let rec_b = Array1::from(read_values(n)?);
    let def_w = Array2::from_shape_vec((n, m), read_values(n * m)?).expect("shape checked");
    let def_b = Array1::from(read_values(n)?);

    let mut trailing = [0u8; 1];
    match input.read(&mut trailing) {
        Ok(0) => {}
        Ok(_) => return Err(Error::Data(format!("{path_str}: trailing bytes after parameters"))),
        Err(e) => return Err(Error::io(&path_str, e)),
    }

    Ok(ModelParams { enc_w, enc_b, rec_w, rec_b, def_w, def_b })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::init_params;

    #[test]
    fn round_trip_is_bit_exact() {
        let params = init_params(7, 5, 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        save_checkpoint(&params, &path).unwrap();
        let loaded = load_checkpoint(&path).unwrap();
        assert_eq!(params, loaded);
    }

    #[test]
    fn rejects_wrong_magic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bogus.ckpt");
        std::fs::write(&path, b"NOPE0000000000000000").unwrap();
        assert!(load_checkpoint(&path).is_err());
    }

    #[test]
    fn rejects_truncated_file() {
        let params = init_params(4, 4, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        save_checkpoint(&params, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 9]).unwrap();
        assert!(load_checkpoint(&path).is_err());
    }

    #[test]
    fn rejects_trailing_bytes() {
        let params = init_params(3, 2, 2).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        save_checkpoint(&params, &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes.push(0);
        std::fs::write(&path, &bytes).unwrap();
        assert!(load_checkpoint(&path).is_err());
    }
}
