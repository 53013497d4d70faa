//! Hard-decision Viterbi decoding with a zero-tail constraint.

use super::conv::Trellis;
use crate::error::{Error, Result};

/// Maximum-likelihood information bits under the Hamming metric.
///
/// Ties keep the lower-indexed predecessor so decoding is deterministic.
pub fn viterbi_decode(coded: &[u8], trellis: &Trellis) -> Result<Vec<u8>> {
    let mem = trellis.memory();
    if coded.len() % 2 != 0 || coded.len() / 2 <= mem {
        return Err(Error::invalid(format!(
            "{} coded bits do not form a terminated rate-1/2 codeword",
            coded.len()
        )));
    }
    let steps = coded.len() / 2;
    let ns = trellis.num_states;
    const INF: u32 = u32::MAX / 2;
    let mut metric = vec![INF; ns];
    metric[0] = 0;
    let mut next_metric = vec![INF; ns];
    let mut choice = vec![0u8; steps * ns];
    for t in 0..steps {
        let rx = (coded[2 * t] & 1) | ((coded[2 * t + 1] & 1) << 1);
        for to in 0..ns {
            let mut best = INF;
            let mut pick = 0u8;
            for (k, &(from, u)) in trellis.prev[to].iter().enumerate() {
                if t >= steps - mem && u == 1 {
                    continue;
                }
                let m = metric[from as usize];
                if m >= INF {
                    continue;
                }
                let o = trellis.output[from as usize][u as usize];
                let cand = m + (o ^ rx).count_ones();
                if cand < best {
                    best = cand;
                    pick = k as u8;
                }
            }
            next_metric[to] = best;
            choice[t * ns + to] = pick;
        }
        std::mem::swap(&mut metric, &mut next_metric);
    }
    let mut bits = vec![0u8; steps];
    let mut state = 0usize;
    for t in (0..steps).rev() {
        let (from, u) = trellis.prev[state][choice[t * ns + state] as usize];
        bits[t] = u;
        state = from as usize;
    }
    bits.truncate(steps - mem);
    Ok(bits)
}
