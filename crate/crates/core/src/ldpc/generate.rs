//! Seeded construction of regular LDPC codes.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ParityCheckMatrix;
use crate::error::{Error, Result};

const MAX_REPAIR_ROUNDS: usize = 10_000;
const MAX_ROW_WEIGHT: usize = 1000;

/// Generates an `(col_weight, row_weight)`-regular parity-check matrix with
/// `n` columns and `m = n * col_weight / row_weight` rows.
///
/// When `row_weight` divides `n` this is Gallager's construction: `col_weight`
/// bands of `n / row_weight` rows, each band a seeded column permutation cut
/// into consecutive groups, so no row can contain a column twice. Otherwise
/// edge sockets are permuted at random and double edges are removed by
/// seeded swaps between rows.
pub fn generate_regular_code(
    n: usize,
    col_weight: usize,
    row_weight: usize,
    seed: u64,
) -> Result<ParityCheckMatrix> {
    if n == 0 || col_weight == 0 || row_weight < 2 {
        return Err(Error::invalid(format!(
            "infeasible code parameters n={n} wc={col_weight} wr={row_weight}"
        )));
    }
    if !(n * col_weight).is_multiple_of(row_weight) {
        return Err(Error::invalid(format!(
            "n * wc = {} is not divisible by wr = {row_weight}",
            n * col_weight
        )));
    }
    let m = n * col_weight / row_weight;
    if m >= n || row_weight > n || col_weight > m {
        return Err(Error::invalid(format!(
            "infeasible code parameters n={n} wc={col_weight} wr={row_weight} (m={m})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = if n.is_multiple_of(row_weight) {
        gallager_rows(n, col_weight, row_weight, &mut rng)
    } else {
        socket_rows(n, col_weight, row_weight, &mut rng)?
    };
    ParityCheckMatrix::from_rows(n, &rows)
}

/// Smallest `(col_weight, row_weight)` with `col_weight >= 3` and design rate
/// `1 - col_weight / row_weight` equal to `rate`.
pub fn degrees_for_rate(rate: f64) -> Result<(usize, usize)> {
    if !(rate > 0.0 && rate < 1.0) {
        return Err(Error::invalid(format!("code rate {rate} outside (0, 1)")));
    }
    for row_weight in 2..=MAX_ROW_WEIGHT {
        let col_weight = (1.0 - rate) * row_weight as f64;
        let rounded = col_weight.round();
        if rounded >= 1.0 && (col_weight - rounded).abs() < 1e-9 {
            let scale = 3usize.div_ceil(rounded as usize);
            return Ok((rounded as usize * scale, row_weight * scale));
        }
    }
    Err(Error::invalid(format!(
        "rate {rate} is not 1 - p/q for a row weight q <= {MAX_ROW_WEIGHT}"
    )))
}

fn gallager_rows(
    n: usize,
    col_weight: usize,
    row_weight: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<usize>> {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut rows = Vec::with_capacity(n * col_weight / row_weight);
    for band in 0..col_weight {
        if band > 0 {
            perm.shuffle(rng);
        }
        rows.extend(perm.chunks(row_weight).map(|c| c.to_vec()));
    }
    rows
}

fn socket_rows(
    n: usize,
    col_weight: usize,
    row_weight: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<usize>>> {
    let mut sockets: Vec<usize> = (0..n)
        .flat_map(|v| std::iter::repeat_n(v, col_weight))
        .collect();
    sockets.shuffle(rng);
    let m = sockets.len() / row_weight;

    for _ in 0..MAX_REPAIR_ROUNDS {
        let mut clean = true;
        for j in 0..m {
            let row = j * row_weight..(j + 1) * row_weight;
            let Some(dup) = duplicate_position(&sockets[row.clone()]) else {
                continue;
            };
            clean = false;
            let p = row.start + dup;
            let v = sockets[p];
            let q = rng.gen_range(0..sockets.len());
            let other = (q / row_weight) * row_weight..(q / row_weight + 1) * row_weight;
            let u = sockets[q];
            if other == row || sockets[row.clone()].contains(&u) || sockets[other].contains(&v) {
                continue;
            }
            sockets.swap(p, q);
        }
        if clean {
            return Ok(sockets.chunks(row_weight).map(|c| c.to_vec()).collect());
        }
    }
    Err(Error::invalid(
        "could not remove double edges from the random code",
    ))
}

fn duplicate_position(row: &[usize]) -> Option<usize> {
    (1..row.len()).find(|&i| row[..i].contains(&row[i]))
}
