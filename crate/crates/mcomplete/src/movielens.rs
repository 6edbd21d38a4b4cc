//! MovieLens rating files.
//!
//! `ml100k` (`u.data`): tab-separated `user item rating timestamp`.
//! `ml1m` (`ratings.dat`): `user::item::rating::timestamp`.
//! Ids are 1-based in the file and 0-based in the result.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;

use mcomplete_core::ObservedMatrix;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MovieLensFormat {
    Ml100k,
    Ml1m,
}

impl MovieLensFormat {
    pub fn name(self) -> &'static str {
        match self {
            MovieLensFormat::Ml100k => "ml100k",
            MovieLensFormat::Ml1m => "ml1m",
        }
    }

    fn separator(self) -> &'static str {
        match self {
            MovieLensFormat::Ml100k => "\t",
            MovieLensFormat::Ml1m => "::",
        }
    }

    /// Users × items of the published dataset.
    pub fn canonical_shape(self) -> (usize, usize) {
        match self {
            MovieLensFormat::Ml100k => (943, 1682),
            MovieLensFormat::Ml1m => (6040, 3952),
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            MovieLensFormat::Ml100k => "ml100k (u.data: user<TAB>item<TAB>rating<TAB>timestamp)",
            MovieLensFormat::Ml1m => "ml1m (ratings.dat: user::item::rating::timestamp)",
        }
    }
}

impl FromStr for MovieLensFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ml100k" => Ok(MovieLensFormat::Ml100k),
            "ml1m" => Ok(MovieLensFormat::Ml1m),
            other => Err(format!("unknown MovieLens format {other:?} (expected ml100k or ml1m)")),
        }
    }
}

/// Parses ratings; the shape is (largest user id, largest item id).
pub fn parse_movielens<R: BufRead>(r: R, format: MovieLensFormat) -> Result<ObservedMatrix> {
    let sep = format.separator();
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    let mut entries = Vec::new();
    let (mut m, mut n) = (0usize, 0usize);
    for (idx, line) in r.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(sep).collect();
        if fields.len() != 4 {
            return Err(Error::parse(lineno, format!("expected 4 fields separated by {sep:?}, found {}", fields.len())));
        }
        let id = |s: &str, what: &str| -> Result<usize> {
            match s.trim().parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v),
                _ => Err(Error::parse(lineno, format!("bad {what} id {s:?} (ids are 1-based)"))),
            }
        };
        let user = id(fields[0], "user")?;
        let item = id(fields[1], "item")?;
        let rating = match fields[2].trim().parse::<u8>() {
            Ok(v @ 1..=5) => f64::from(v),
            _ => return Err(Error::parse(lineno, format!("rating {:?} is not in 1..=5", fields[2]))),
        };
        fields[3]
            .trim()
            .parse::<u64>()
            .map_err(|_| Error::parse(lineno, format!("bad timestamp {:?}", fields[3])))?;
        if let Some(first) = seen.insert((user, item), lineno) {
            return Err(Error::parse(lineno, format!("duplicate rating for user {user}, item {item} (first on line {first})")));
        }
        m = m.max(user);
        n = n.max(item);
        entries.push((user - 1, item - 1, rating));
    }
    if entries.is_empty() {
        return Err(Error::parse(0, "no ratings found"));
    }
    Ok(ObservedMatrix::from_triplets(m, n, entries)?)
}

pub fn load_movielens(path: &Path, format: MovieLensFormat) -> Result<ObservedMatrix> {
    let f = File::open(path).map_err(|e| {
        Error::io(path, std::io::Error::new(e.kind(), format!("{e}; expected a MovieLens file in format {}", format.describe())))
    })?;
    parse_movielens(BufReader::new(f), format)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_file() {
        let obs = parse_movielens("1\t1\t5\t0\n2\t2\t3\t0\n1\t2\t4\t0\n".as_bytes(), MovieLensFormat::Ml100k).unwrap();
        assert_eq!(obs.shape(), (2, 2));
        assert_eq!(obs.nnz(), 3);
        let got: Vec<_> = obs.iter().collect();
        assert_eq!(got, vec![(0, 0, 5.0), (0, 1, 4.0), (1, 1, 3.0)]);
    }

    #[test]
    fn ml1m_separator() {
        let obs = parse_movielens("3::7::2::978300760\r\n1::1::1::1\n".as_bytes(), MovieLensFormat::Ml1m).unwrap();
        assert_eq!(obs.shape(), (3, 7));
    }

    #[test]
    fn errors_name_the_line() {
        let cases = [
            "1\t1\t5\t0\n1\t1\t4\t0\n",
            "1\t1\t5\t0\n0\t1\t4\t0\n",
            "1\t1\t5\t0\n2\t1\t6\t0\n",
            "1\t1\t5\t0\n2\t1\t4.5\t0\n",
            "1\t1\t5\t0\n2\t1\t4\n",
        ];
        for text in cases {
            let err = parse_movielens(text.as_bytes(), MovieLensFormat::Ml100k).unwrap_err();
            assert!(matches!(err, Error::Parse { line: 2, .. }), "{text:?}: {err}");
        }
        assert!(parse_movielens("1::1::5::0\n".as_bytes(), MovieLensFormat::Ml100k).is_err());
    }

    #[test]
    fn missing_file_names_format() {
        let err = load_movielens(Path::new("/nonexistent/u.data"), MovieLensFormat::Ml100k).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("/nonexistent/u.data") && msg.contains("ml100k"), "{msg}");
    }
}
