//! LIBSVM text format and synthetic problem generators.
//!
//! Records look like `<label> <idx>:<val> <idx>:<val> ...` with 1-based,
//! strictly increasing indices. Blank lines and lines starting with `#` are
//! skipped. Everything is densified on load.

use std::io::{BufRead, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: DenseMatrix,
    pub labels: Vec<f64>,
    /// File path or `synthetic:<recipe>:<seed>`.
    pub source: String,
}

impl Dataset {
    pub fn rows(&self) -> usize {
        self.features.rows()
    }

    pub fn cols(&self) -> usize {
        self.features.cols()
    }

    /// Scales every column by its largest absolute value (all-zero columns are left alone).
    pub fn normalize_max_abs(&mut self) {
        let (m, n) = (self.rows(), self.cols());
        let mut scale = vec![0.0f64; n];
        for i in 0..m {
            for (s, v) in scale.iter_mut().zip(self.features.row(i)) {
                *s = s.max(v.abs());
            }
        }
        for i in 0..m {
            for (v, s) in self.features.row_mut(i).iter_mut().zip(&scale) {
                if *s > 0.0 {
                    *v /= s;
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Map labels `{0, 1}` to `{−1, +1}` and reject anything outside `{−1, 0, +1}`.
    pub classification: bool,
}

fn parse_err(line: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        column,
        message: message.into(),
    }
}

/// Reads a LIBSVM-format stream into a dense dataset.
pub fn parse_libsvm<R: BufRead>(reader: R, opts: ParseOptions, source: &str) -> Result<Dataset> {
    let mut labels = Vec::new();
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut n = 0usize;
    let mut last_line = 0usize;

    for (lineno, line) in reader.lines().enumerate() {
        let lineno = lineno + 1;
        last_line = lineno;
        let line = line.map_err(|e| parse_err(lineno, 1, format!("read failed: {e}")))?;
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = tokens_with_columns(&line);
        let (col, label_tok) = tokens.next().expect("line is not blank");
        let label: f64 = label_tok
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| parse_err(lineno, col, format!("invalid label '{label_tok}'")))?;

        let mut entries = Vec::new();
        let mut prev = 0usize;
        for (col, tok) in tokens {
            let (idx_tok, val_tok) = tok.split_once(':').ok_or_else(|| {
                parse_err(
                    lineno,
                    col,
                    format!("expected <index>:<value>, got '{tok}'"),
                )
            })?;
            let idx: usize = idx_tok
                .parse()
                .map_err(|_| parse_err(lineno, col, format!("invalid index '{idx_tok}'")))?;
            if idx == 0 {
                return Err(parse_err(lineno, col, "indices are 1-based; got 0"));
            }
            if idx == prev {
                return Err(parse_err(lineno, col, format!("duplicate index {idx}")));
            }
            if idx < prev {
                return Err(parse_err(
                    lineno,
                    col,
                    format!("indices must increase; {idx} follows {prev}"),
                ));
            }
            let val_col = col + idx_tok.len() + 1;
            let val: f64 = val_tok
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| parse_err(lineno, val_col, format!("invalid value '{val_tok}'")))?;
            prev = idx;
            entries.push((idx, val));
        }
        n = n.max(prev);
        labels.push(label);
        rows.push(entries);
    }

    if rows.is_empty() {
        return Err(parse_err(last_line.max(1), 1, "no records"));
    }
    if n == 0 {
        return Err(parse_err(last_line, 1, "no feature indices in any record"));
    }

    if opts.classification {
        let zero_one = labels.iter().all(|l| *l == 0.0 || *l == 1.0);
        for (i, l) in labels.iter_mut().enumerate() {
            *l = match *l {
                v if v == 0.0 && zero_one => -1.0,
                v if v == 1.0 || v == -1.0 => v,
                v => {
                    return Err(Error::Data(format!(
                        "record {}: label {v} is not a binary class label",
                        i + 1
                    )))
                }
            };
        }
    }

    let mut data = vec![0.0; rows.len() * n];
    for (i, entries) in rows.iter().enumerate() {
        for &(idx, val) in entries {
            data[i * n + idx - 1] = val;
        }
    }
    Ok(Dataset {
        features: DenseMatrix::from_row_major(rows.len(), n, data)?,
        labels,
        source: source.to_string(),
    })
}

/// Whitespace-separated tokens with their 1-based character column.
fn tokens_with_columns(line: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (pos, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s, &line[s..pos]));
            }
        } else if start.is_none() {
            start = Some(pos);
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter()
        .map(move |(s, tok)| (line[..s].chars().count() + 1, tok))
}

/// Writes the dataset in LIBSVM format, zeros omitted.
///
/// Values use the shortest representation that round-trips exactly. The last
/// column is written explicitly on the first record if it is all-zero, so the
/// column count survives a reparse.
pub fn write_libsvm<W: Write>(ds: &Dataset, mut out: W) -> std::io::Result<()> {
    let n = ds.cols();
    let last_col_empty = (0..ds.rows()).all(|i| ds.features.row(i)[n - 1] == 0.0);
    for i in 0..ds.rows() {
        write!(out, "{}", ds.labels[i])?;
        for (j, v) in ds.features.row(i).iter().enumerate() {
            if *v != 0.0 || (i == 0 && j == n - 1 && last_col_empty) {
                write!(out, " {}:{}", j + 1, v)?;
            }
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Least-squares instance with a known solution on the unit sphere.
///
/// `x*` is a normalized Gaussian vector, `A` has i.i.d. Uniform[0, 1] entries and
/// `b = A x*`, so `½‖Ax − b‖²` over the unit ball has optimal value 0 at `x*`.
/// The dataset's labels hold `b`.
pub fn synth_least_squares(m: usize, n: usize, seed: u64) -> Result<(Dataset, Vec<f64>)> {
    if m == 0 || n == 0 {
        return Err(Error::usage(format!(
            "synthetic problem needs m, n >= 1, got {m}x{n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x_star: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let norm = x_star.iter().map(|v| v * v).sum::<f64>().sqrt();
    x_star.iter_mut().for_each(|v| *v /= norm);
    let data: Vec<f64> = (0..m * n).map(|_| rng.random::<f64>()).collect();
    let a = DenseMatrix::from_row_major(m, n, data)?;
    let b = a.mul_vec(&x_star)?;
    Ok((
        Dataset {
            features: a,
            labels: b,
            source: format!("synthetic:ls:{seed}"),
        },
        x_star,
    ))
}

/// Data for the `p`-power residual loss; identical to [`synth_least_squares`]
/// for the same seed, so the residual vanishes at the returned `x*`.
pub fn synth_p_power(m: usize, n: usize, p: f64, seed: u64) -> Result<(Dataset, Vec<f64>)> {
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::usage(format!("p must be in [1, 2], got {p}")));
    }
    let (mut ds, x_star) = synth_least_squares(m, n, seed)?;
    ds.source = format!("synthetic:ppower:{seed}");
    Ok((ds, x_star))
}

/// Binary classification data: Uniform[−1, 1] features and labels
/// `sign(⟨aᵢ, w⟩ + 0.1·noise)` for a hidden Gaussian `w`, in `{−1, +1}`.
pub fn synth_classification(m: usize, n: usize, seed: u64) -> Result<Dataset> {
    if m == 0 || n == 0 {
        return Err(Error::usage(format!(
            "synthetic problem needs m, n >= 1, got {m}x{n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let data: Vec<f64> = (0..m * n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let features = DenseMatrix::from_row_major(m, n, data)?;
    let scores = features.mul_vec(&w)?;
    let labels = scores
        .iter()
        .map(|s| {
            let noise: f64 = rng.sample(StandardNormal);
            if s + 0.1 * noise >= 0.0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    Ok(Dataset {
        features,
        labels,
        source: format!("synthetic:classification:{seed}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(s: &str) -> Result<Dataset> {
        parse_libsvm(s.as_bytes(), ParseOptions::default(), "test")
    }

    #[test]
    fn parses_example() {
        let ds = parse("+1 1:0.5 3:2\n-1 2:1").unwrap();
        assert_eq!((ds.rows(), ds.cols()), (2, 3));
        assert_eq!(ds.features.row(0), &[0.5, 0.0, 2.0]);
        assert_eq!(ds.features.row(1), &[0.0, 1.0, 0.0]);
        assert_eq!(ds.labels, vec![1.0, -1.0]);
    }

    #[test]
    fn empty_input_has_no_records() {
        for input in ["", "\n\n", "# only a comment\n"] {
            match parse(input) {
                Err(Error::Parse { message, .. }) => assert_eq!(message, "no records"),
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn comments_blank_lines_and_spacing() {
        let ds = parse("# header\n\n  1   2:3.5\t4:1  \n\n0 1:1\n").unwrap();
        assert_eq!((ds.rows(), ds.cols()), (2, 4));
        assert_eq!(ds.features.row(0), &[0.0, 3.5, 0.0, 1.0]);
    }

    #[test]
    fn errors_carry_line_and_column() {
        let cases = [
            ("1 1:2\n1 0:3\n", 2, 3),
            ("1 1:2\n\n1 2:1 2:5\n", 3, 7),
            ("1 3:1 2:1\n", 1, 7),
            ("1 1:x\n", 1, 5),
            ("abc 1:1\n", 1, 1),
            ("1 1:1\n# c\n-1 7\n", 3, 4),
        ];
        for (input, line, column) in cases {
            match parse(input) {
                Err(Error::Parse {
                    line: l, column: c, ..
                }) => {
                    assert_eq!((l, c), (line, column), "{input:?}")
                }
                other => panic!("{input:?}: unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn duplicate_index_is_rejected() {
        match parse("1 2:1 2:1\n") {
            Err(Error::Parse { message, .. }) => assert!(message.contains("duplicate")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn classification_remaps_zero_one() {
        let opts = ParseOptions {
            classification: true,
        };
        let ds = parse_libsvm("0 1:1\n1 1:2\n".as_bytes(), opts, "t").unwrap();
        assert_eq!(ds.labels, vec![-1.0, 1.0]);
        let ds = parse_libsvm("-1 1:1\n+1 1:2\n".as_bytes(), opts, "t").unwrap();
        assert_eq!(ds.labels, vec![-1.0, 1.0]);
        assert!(matches!(
            parse_libsvm("2 1:1\n1 1:2\n".as_bytes(), opts, "t"),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn normalization_scales_columns() {
        let mut ds = parse("1 1:2 2:-4\n1 1:-1 2:1\n").unwrap();
        ds.normalize_max_abs();
        assert_eq!(ds.features.row(0), &[1.0, -1.0]);
        assert_eq!(ds.features.row(1), &[-0.5, 0.25]);
    }

    #[test]
    fn trailing_zero_column_survives_round_trip() {
        let ds = Dataset {
            features: DenseMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap(),
            labels: vec![1.0, 2.0],
            source: "t".into(),
        };
        let mut buf = Vec::new();
        write_libsvm(&ds, &mut buf).unwrap();
        let back = parse_libsvm(buf.as_slice(), ParseOptions::default(), "t").unwrap();
        assert_eq!(back.features, ds.features);
    }

    #[test]
    fn synthetic_least_squares_properties() {
        let (ds, x) = synth_least_squares(30, 7, 4).unwrap();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        let ax = ds.features.mul_vec(&x).unwrap();
        let res: f64 = ax
            .iter()
            .zip(&ds.labels)
            .map(|(a, b)| (a - b).powi(2))
            .sum();
        assert!(res.sqrt() < 1e-12);
        assert!(ds
            .features
            .as_slice()
            .iter()
            .all(|v| (0.0..1.0).contains(v)));
        assert_eq!(synth_least_squares(30, 7, 4).unwrap().0, ds);
        assert_ne!(synth_least_squares(30, 7, 5).unwrap().0, ds);
    }

    #[test]
    fn synthetic_p_power_reuses_least_squares_data() {
        let (ls, _) = synth_least_squares(12, 3, 9).unwrap();
        let (pp, _) = synth_p_power(12, 3, 2.0, 9).unwrap();
        assert_eq!(ls.features, pp.features);
        assert_eq!(ls.labels, pp.labels);
        assert!(synth_p_power(12, 3, 0.5, 9).is_err());
    }

    #[test]
    fn p_power_vanishes_at_planted_solution() {
        let (ds, x) = synth_p_power(15, 4, 1.0, 2).unwrap();
        let loss = crate::problem::PPowerResidual::new(ds.features, ds.labels, 1.0).unwrap();
        assert!(crate::problem::Loss::value(&loss, &x) < 1e-12);
    }

    #[test]
    fn p_power_is_midpoint_convex() {
        use crate::problem::{Loss, PPowerResidual};
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for p in [1.0, 1.3, 1.5, 2.0] {
            let (ds, _) = synth_p_power(20, 5, p, 8).unwrap();
            let loss = PPowerResidual::new(ds.features, ds.labels, p).unwrap();
            for _ in 0..100 {
                let x: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
                let y: Vec<f64> = (0..5).map(|_| rng.random_range(-2.0..2.0)).collect();
                let mid: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
                let chord = 0.5 * (loss.value(&x) + loss.value(&y));
                assert!(loss.value(&mid) <= chord * (1.0 + 1e-12), "p={p}");
            }
        }
    }

    #[test]
    fn synthetic_classification_labels_are_binary() {
        let ds = synth_classification(50, 4, 1).unwrap();
        assert!(ds.labels.iter().all(|l| *l == 1.0 || *l == -1.0));
        assert!(ds.labels.contains(&1.0) && ds.labels.contains(&-1.0));
    }

    fn record() -> impl Strategy<Value = (f64, Vec<(usize, f64)>)> {
        (
            prop_oneof![Just(1.0), Just(-1.0), -1e6f64..1e6],
            prop::collection::btree_map(1usize..40, -1e3f64..1e3, 0..10),
        )
            .prop_map(|(l, m)| (l, m.into_iter().filter(|(_, v)| *v != 0.0).collect()))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn write_then_parse_round_trips(records in prop::collection::vec(record(), 1..20)) {
            prop_assume!(records.iter().any(|(_, e)| !e.is_empty()));
            let mut text = String::new();
            for (l, entries) in &records {
                text.push_str(&format!("{l}"));
                for (i, v) in entries {
                    text.push_str(&format!(" {i}:{v}"));
                }
                text.push('\n');
            }
            let ds = parse(&text).unwrap();
            let mut buf = Vec::new();
            write_libsvm(&ds, &mut buf).unwrap();
            let back = parse_libsvm(buf.as_slice(), ParseOptions::default(), "test").unwrap();
            prop_assert_eq!(back, ds);
        }
    }
}
