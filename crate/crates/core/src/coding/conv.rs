//! Rate-1/2 feed-forward convolutional code with zero-tail termination.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Generators are written as octal digits, e.g. `[133, 171]`; the most
/// significant tap multiplies the current input bit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvCodeSpec {
    pub generators: [u32; 2],
    pub constraint_length: usize,
}

impl Default for ConvCodeSpec {
    fn default() -> Self {
        Self {
            generators: [133, 171],
            constraint_length: 7,
        }
    }
}

fn octal_to_bits(g: u32) -> Result<u32> {
    let mut value = 0u32;
    for ch in g.to_string().chars() {
        let d = ch.to_digit(10).unwrap_or(9);
        if d > 7 {
            return Err(Error::invalid(format!("generator {g} is not an octal literal")));
        }
        value = value * 8 + d;
    }
    Ok(value)
}

impl ConvCodeSpec {
    pub fn validate(&self) -> Result<()> {
        let taps = self.taps()?;
        if taps.iter().any(|&t| t == 0) {
            return Err(Error::invalid("generators must be nonzero"));
        }
        let degree = 32 - taps.iter().map(|t| t.leading_zeros()).min().unwrap_or(32) as usize;
        if degree != self.constraint_length {
            return Err(Error::invalid(format!(
                "constraint length {} does not match generator degree + 1 = {degree}",
                self.constraint_length
            )));
        }
        if !(2..=16).contains(&self.constraint_length) {
            return Err(Error::invalid("constraint length must lie in 2..=16"));
        }
        Ok(())
    }

    fn taps(&self) -> Result<[u32; 2]> {
        Ok([octal_to_bits(self.generators[0])?, octal_to_bits(self.generators[1])?])
    }

    /// Tail length `constraint_length − 1`.
    pub fn memory(&self) -> usize {
        self.constraint_length - 1
    }

    /// Coded length for `info_len` information bits.
    pub fn coded_len(&self, info_len: usize) -> usize {
        2 * (info_len + self.memory())
    }

    /// Information bits carried by `coded_len` coded bits.
    pub fn info_len(&self, coded_len: usize) -> Result<usize> {
        if coded_len % 2 != 0 || coded_len / 2 <= self.memory() {
            return Err(Error::invalid(format!(
                "coded length {coded_len} is not a terminated rate-1/2 codeword"
            )));
        }
        Ok(coded_len / 2 - self.memory())
    }

    pub fn trellis(&self) -> Result<Trellis> {
        self.validate()?;
        Trellis::new(self.taps()?, self.constraint_length)
    }
}

/// State-transition tables; state bit `K−2` holds the most recent input.
#[derive(Debug, Clone)]
pub struct Trellis {
    pub constraint_length: usize,
    pub num_states: usize,
    /// `next[s][u]`.
    pub next: Vec<[u16; 2]>,
    /// `output[s][u]` packs `(s⁰, s¹)` as `s⁰ | s¹ << 1`.
    pub output: Vec<[u8; 2]>,
    /// `prev[s']` lists the two `(state, input)` pairs that lead to `s'`.
    pub prev: Vec<[(u16, u8); 2]>,
}

impl Trellis {
    fn new(taps: [u32; 2], k: usize) -> Result<Self> {
        let num_states = 1usize << (k - 1);
        let mut next = Vec::with_capacity(num_states);
        let mut output = Vec::with_capacity(num_states);
        for s in 0..num_states as u32 {
            let mut nx = [0u16; 2];
            let mut out = [0u8; 2];
            for u in 0..2u32 {
                let reg = (u << (k - 1)) | s;
                let c0 = (reg & taps[0]).count_ones() & 1;
                let c1 = (reg & taps[1]).count_ones() & 1;
                nx[u as usize] = (reg >> 1) as u16;
                out[u as usize] = (c0 | (c1 << 1)) as u8;
            }
            next.push(nx);
            output.push(out);
        }
        let mut prev = vec![[(0u16, 0u8); 2]; num_states];
        let mut filled = vec![0usize; num_states];
        for (s, nx) in next.iter().enumerate() {
            for (u, &t) in nx.iter().enumerate() {
                let t = t as usize;
                prev[t][filled[t]] = (s as u16, u as u8);
                filled[t] += 1;
            }
        }
        Ok(Self {
            constraint_length: k,
            num_states,
            next,
            output,
            prev,
        })
    }

    pub fn memory(&self) -> usize {
        self.constraint_length - 1
    }
}

/// Encodes `bits` (0/1) followed by a zero tail; output order is
/// `s⁰_1, s¹_1, s⁰_2, s¹_2, …`.
pub fn conv_encode(bits: &[u8], trellis: &Trellis) -> Result<Vec<u8>> {
    if bits.is_empty() {
        return Err(Error::invalid("cannot encode an empty bitstream"));
    }
    let mut out = Vec::with_capacity(2 * (bits.len() + trellis.memory()));
    let mut state = 0usize;
    let tail = std::iter::repeat_n(0u8, trellis.memory());
    for b in bits.iter().copied().chain(tail) {
        if b > 1 {
            return Err(Error::invalid("bits must be 0 or 1"));
        }
        let o = trellis.output[state][b as usize];
        out.push(o & 1);
        out.push(o >> 1);
        state = trellis.next[state][b as usize] as usize;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn impulse_response_of_default_code() {
        let t = ConvCodeSpec::default().trellis().unwrap();
        let mut bits = vec![0u8; 10];
        bits[0] = 1;
        let c = conv_encode(&bits, &t).unwrap();
        let s0: Vec<u8> = c.iter().step_by(2).take(7).copied().collect();
        let s1: Vec<u8> = c.iter().skip(1).step_by(2).take(7).copied().collect();
        assert_eq!(s0, [1, 0, 1, 1, 0, 1, 1]);
        assert_eq!(s1, [1, 1, 1, 1, 0, 0, 1]);
        assert_eq!(c.len(), 2 * (10 + 6));
    }

    #[test]
    fn zero_input_gives_zero_codeword() {
        let t = ConvCodeSpec::default().trellis().unwrap();
        assert!(conv_encode(&[0; 20], &t).unwrap().iter().all(|&b| b == 0));
        assert!(conv_encode(&[], &t).is_err());
    }

    #[test]
    fn spec_validation() {
        let bad = ConvCodeSpec {
            generators: [133, 171],
            constraint_length: 5,
        };
        assert!(bad.validate().is_err());
        let non_octal = ConvCodeSpec {
            generators: [139, 171],
            constraint_length: 7,
        };
        assert!(non_octal.validate().is_err());
        assert_eq!(ConvCodeSpec::default().info_len(4800).unwrap(), 2394);
    }
}
