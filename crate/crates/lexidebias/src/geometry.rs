//! Vector-space primitives: cosine similarity and the bias-direction
//! rejection.
//!
//! The rejection is the workhorse of the debiasing objective: for a word
//! vector `w` and its definition vector `s`, `vector_rejection(w, s)` is the
//! component of `w` that the definition direction does not explain. The
//! encoder is trained to map that residual orthogonally to the encoded word.

use crate::error::{Error, Result};

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn check_same_len(u: &[f64], v: &[f64]) -> Result<()> {
    if u.len() != v.len() {
        return Err(Error::InvalidArgument(format!(
            "vector length mismatch: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    Ok(())
}

/// Cosine similarity, clamped to `[-1, 1]` against rounding.
///
/// Errors on a zero vector: the similarity is undefined there and callers
/// must not paper over it.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64> {
    check_same_len(u, v)?;
    let nu = norm(u);
    let nv = norm(v);
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::Data("cosine of a zero vector".into()));
    }
    Ok((dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

/// Rejection of `w` from the direction of `s`: `w - (w . s_hat) s_hat` with
/// `s_hat = s / ||s||`.
///
/// The result is orthogonal to `s` and depends only on the direction of `s`,
/// not its magnitude.
pub fn vector_rejection(w: &[f64], s: &[f64]) -> Result<Vec<f64>> {
    check_same_len(w, s)?;
    let ns = norm(s);
    if ns == 0.0 {
        return Err(Error::Data("rejection from a zero direction".into()));
    }
    let coeff = dot(w, s) / (ns * ns);
    Ok(w.iter().zip(s).map(|(wi, si)| wi - coeff * si).collect())
}
