//! Dense matrix container shared by kernel matrices, embeddings and
//! checkpoints: one line of compact JSON (the header), a `\n`, then the
//! payload as little-endian `f64` values in row-major order.

use std::io::{BufRead, Write};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

pub fn write<W: Write, H: Serialize>(mut out: W, header: &H, data: &[f64]) -> Result<()> {
    let json = serde_json::to_vec(header)?;
    out.write_all(&json)?;
    out.write_all(b"\n")?;
    let mut buf = Vec::with_capacity(data.len() * 8);
    for v in data {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)?;
    out.flush()?;
    Ok(())
}

/// Reads a header and exactly `len(header)` values, where the length is
/// derived from the parsed header by `count`.
pub fn read<R: BufRead, H: DeserializeOwned>(
    mut input: R,
    count: impl FnOnce(&H) -> usize,
) -> Result<(H, Vec<f64>)> {
    let mut line = Vec::new();
    input.read_until(b'\n', &mut line)?;
    if line.last() != Some(&b'\n') {
        return Err(Error::Format("missing header terminator".into()));
    }
    line.pop();
    let header: H = serde_json::from_slice(&line)?;
    let n = count(&header);
    let mut raw = Vec::new();
    input.read_to_end(&mut raw)?;
    if raw.len() != n * 8 {
        return Err(Error::Format(format!(
            "payload holds {} bytes, header implies {}",
            raw.len(),
            n * 8
        )));
    }
    let data = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok((header, data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct Head {
        rows: usize,
        cols: usize,
    }

    #[test]
    fn header_and_payload_survive() {
        let data = [1.0, -2.5, f64::MIN_POSITIVE, 3.0e300, 0.0, 7.0];
        let mut buf = Vec::new();
        write(&mut buf, &Head { rows: 2, cols: 3 }, &data).unwrap();
        assert!(buf.starts_with(b"{\"rows\":2,\"cols\":3}\n"));
        let (h, back): (Head, _) = read(&buf[..], |h: &Head| h.rows * h.cols).unwrap();
        assert_eq!(h, Head { rows: 2, cols: 3 });
        assert_eq!(back, data);
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let mut buf = Vec::new();
        write(&mut buf, &Head { rows: 1, cols: 2 }, &[1.0, 2.0]).unwrap();
        buf.pop();
        let err = read::<_, Head>(&buf[..], |h| h.rows * h.cols).unwrap_err();
        assert!(matches!(err, Error::Format(_)));
    }
}
