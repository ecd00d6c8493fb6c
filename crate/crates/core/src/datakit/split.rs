use rand::seq::SliceRandom;

use super::MultiModalDataset;
use crate::error::{Error, Result};
use crate::seed;

/// Rounds the `classes x splits` table of ideal counts `size_c * total_s / N`
/// to integers, each entry the floor or ceiling of its ideal value, so that
/// every class total and every split total is exact. Such a rounding always
/// exists; the extra units are placed with augmenting paths.
fn controlled_rounding(class_sizes: &[usize], split_sizes: &[usize]) -> Vec<Vec<usize>> {
    let n: usize = class_sizes.iter().sum();
    let (k, s) = (class_sizes.len(), split_sizes.len());
    let mut table = vec![vec![0usize; s]; k];
    // cells that may still take one more unit
    let mut open = vec![vec![false; s]; k];
    for c in 0..k {
        for j in 0..s {
            let num = class_sizes[c] * split_sizes[j];
            table[c][j] = num / n;
            open[c][j] = !num.is_multiple_of(n);
        }
    }
    let mut row_need: Vec<usize> = (0..k)
        .map(|c| class_sizes[c] - table[c].iter().sum::<usize>())
        .collect();
    let mut col_need: Vec<usize> = (0..s)
        .map(|j| split_sizes[j] - (0..k).map(|c| table[c][j]).sum::<usize>())
        .collect();

    while let Some(start) = row_need.iter().position(|&r| r > 0) {
        // BFS from the row over cells that can take a unit (row -> col) and
        // cells already given one (col -> row, undoing it).
        let mut prev_col: Vec<Option<usize>> = vec![None; s];
        let mut prev_row: Vec<Option<usize>> = vec![None; k];
        let mut seen_row = vec![false; k];
        seen_row[start] = true;
        let mut queue = std::collections::VecDeque::from([start]);
        let mut found = None;
        while let Some(c) = queue.pop_front() {
            for j in 0..s {
                if open[c][j] && prev_col[j].is_none() {
                    prev_col[j] = Some(c);
                    if col_need[j] > 0 {
                        found = Some(j);
                        break;
                    }
                    for c2 in 0..k {
                        if !seen_row[c2]
                            && !open[c2][j]
                            && !(class_sizes[c2] * split_sizes[j]).is_multiple_of(n)
                        {
                            seen_row[c2] = true;
                            prev_row[c2] = Some(j);
                            queue.push_back(c2);
                        }
                    }
                }
            }
            if found.is_some() {
                break;
            }
        }
        let Some(mut j) = found else {
            unreachable!("controlled rounding always exists");
        };
        col_need[j] -= 1;
        loop {
            let c = prev_col[j].expect("path");
            table[c][j] += 1;
            open[c][j] = false;
            match prev_row[c] {
                Some(j2) => {
                    table[c][j2] -= 1;
                    open[c][j2] = true;
                    j = j2;
                }
                None => {
                    row_need[c] -= 1;
                    break;
                }
            }
        }
    }
    table
}

/// Stratified (by true class) train/validation/test index sets, each sorted
/// ascending. Split sizes are `round(train_frac * N)`, `round(val_frac * N)`
/// and the remainder.
pub fn split_indices(
    dataset: &MultiModalDataset,
    train_frac: f64,
    val_frac: f64,
    seed: u64,
) -> Result<[Vec<usize>; 3]> {
    if !(train_frac > 0.0) || !(val_frac > 0.0) {
        return Err(Error::param("split", "fractions must be positive"));
    }
    if train_frac + val_frac >= 1.0 {
        return Err(Error::param("split", "train_frac + val_frac must be below 1"));
    }
    let n = dataset.len();
    let n_train = (train_frac * n as f64).round() as usize;
    let n_val = (val_frac * n as f64).round() as usize;
    if n_train == 0 || n_val == 0 || n_train + n_val >= n {
        return Err(Error::param(
            "split",
            format!("fractions {train_frac}/{val_frac} leave an empty split for N={n}"),
        ));
    }

    let classes = dataset.true_labels.classes();
    let k = dataset.class_count;
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &c) in classes.iter().enumerate() {
        by_class[c].push(i);
    }
    let mut rng = seed::rng(seed::derive_str(seed, "split"));
    for members in &mut by_class {
        members.shuffle(&mut rng);
    }

    let sizes: Vec<usize> = by_class.iter().map(Vec::len).collect();
    let table = controlled_rounding(&sizes, &[n_train, n_val, n - n_train - n_val]);

    let mut parts: [Vec<usize>; 3] = Default::default();
    for (c, members) in by_class.iter().enumerate() {
        let (tr, rest) = members.split_at(table[c][0]);
        let (va, te) = rest.split_at(table[c][1]);
        parts[0].extend_from_slice(tr);
        parts[1].extend_from_slice(va);
        parts[2].extend_from_slice(te);
    }
    for p in &mut parts {
        p.sort_unstable();
    }
    Ok(parts)
}

/// Splits a dataset into (train, validation, test), carrying labels and
/// noise mask with each row.
pub fn split(
    dataset: &MultiModalDataset,
    train_frac: f64,
    val_frac: f64,
    seed: u64,
) -> Result<(MultiModalDataset, MultiModalDataset, MultiModalDataset)> {
    let [tr, va, te] = split_indices(dataset, train_frac, val_frac, seed)?;
    Ok((dataset.subset(&tr), dataset.subset(&va), dataset.subset(&te)))
}
