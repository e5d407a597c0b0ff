//! Tab-separated triple files.
//!
//! A dataset is three UTF-8 files (`train.txt`, `valid.txt`, `test.txt`) with
//! one `head<TAB>relation<TAB>tail` triple per line. Blank lines are ignored.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use mobiuse_core::kg::Insert;
use mobiuse_core::{Split, Triple, TripleStore};

use crate::error::{Error, Result};

/// What to do with a valid/test triple whose entity or relation never
/// appears in train.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LoadMode {
    /// Fail with the offending file and line.
    #[default]
    Strict,
    /// Drop the triple and count it.
    Lenient,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetPaths {
    pub train: PathBuf,
    pub valid: PathBuf,
    pub test: PathBuf,
}

impl DatasetPaths {
    pub fn in_dir(dir: impl AsRef<Path>) -> Self {
        let dir = dir.as_ref();
        Self {
            train: dir.join("train.txt"),
            valid: dir.join("valid.txt"),
            test: dir.join("test.txt"),
        }
    }

    pub fn get(&self, split: Split) -> &Path {
        match split {
            Split::Train => &self.train,
            Split::Valid => &self.valid,
            Split::Test => &self.test,
        }
    }
}

/// Per-split counters gathered while loading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LoadReport {
    pub lines: [usize; 3],
    pub duplicates: [usize; 3],
    pub skipped_unseen: [usize; 3],
}

impl LoadReport {
    pub fn skipped(&self) -> usize {
        self.skipped_unseen.iter().sum()
    }
}

pub fn load_dir(dir: impl AsRef<Path>, mode: LoadMode) -> Result<(TripleStore, LoadReport)> {
    load_triples(&DatasetPaths::in_dir(dir), mode)
}

pub fn load_triples(paths: &DatasetPaths, mode: LoadMode) -> Result<(TripleStore, LoadReport)> {
    let mut store = TripleStore::new();
    let mut report = LoadReport::default();
    for split in Split::ALL {
        let path = paths.get(split);
        let file = File::open(path).map_err(Error::io(path))?;
        read_split(&mut store, &mut report, split, BufReader::new(file), path, mode)?;
    }
    Ok((store, report))
}

/// Appends the triples of one split read from `reader`. `path` is only used
/// in error messages.
pub fn read_split<R: BufRead>(
    store: &mut TripleStore,
    report: &mut LoadReport,
    split: Split,
    reader: R,
    path: &Path,
    mode: LoadMode,
) -> Result<()> {
    let idx = split as usize;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(Error::io(path))?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 || fields.iter().any(|f| f.is_empty()) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                message: format!("expected 3 tab-separated fields, found {}", fields.len()),
            });
        }
        report.lines[idx] += 1;
        match store.insert(split, fields[0], fields[1], fields[2], true) {
            Insert::Added(_) => {}
            Insert::Duplicate(_) => report.duplicates[idx] += 1,
            Insert::Unseen => match mode {
                LoadMode::Lenient => report.skipped_unseen[idx] += 1,
                LoadMode::Strict => {
                    let (what, name) = if store.relations.get(fields[1]).is_none() {
                        ("relation", fields[1])
                    } else if store.entities.get(fields[0]).is_none() {
                        ("entity", fields[0])
                    } else {
                        ("entity", fields[2])
                    };
                    return Err(Error::Unseen {
                        path: path.to_path_buf(),
                        line: line_no,
                        what,
                        name: name.to_string(),
                    });
                }
            },
        }
    }
    Ok(())
}

/// Writes `triples` by name, one per line.
pub fn write_split(path: &Path, store: &TripleStore, triples: &[Triple]) -> Result<()> {
    let file = File::create(path).map_err(Error::io(path))?;
    let mut w = BufWriter::new(file);
    for &t in triples {
        let (h, r, tail) = store.decode(t).ok_or(mobiuse_core::Error::OutOfVocabulary {
            id: t.head.max(t.tail),
            size: store.num_entities(),
        })?;
        writeln!(w, "{h}\t{r}\t{tail}").map_err(Error::io(path))?;
    }
    w.flush().map_err(Error::io(path))
}

/// Writes the three splits of `store` into `dir` (created if missing).
pub fn write_dir(dir: &Path, store: &TripleStore) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(Error::io(dir))?;
    let paths = DatasetPaths::in_dir(dir);
    for split in Split::ALL {
        write_split(paths.get(split), store, store.split(split))?;
    }
    Ok(())
}

/// Dataset counts in the usual `#Ent #Rel #Train #Valid #Test` layout.
pub fn stats_table(name: &str, store: &TripleStore, report: &LoadReport) -> String {
    let cols = ["Dataset", "#Ent", "#Rel", "#Train", "#Valid", "#Test"];
    let values = [
        name.to_string(),
        store.num_entities().to_string(),
        store.num_relations().to_string(),
        store.train().len().to_string(),
        store.split(Split::Valid).len().to_string(),
        store.split(Split::Test).len().to_string(),
    ];
    let widths: Vec<usize> = cols.iter().zip(&values).map(|(c, v)| c.len().max(v.len())).collect();
    let mut out = String::new();
    for (c, w) in cols.iter().zip(&widths) {
        let _ = write!(out, "{c:>w$}  ");
    }
    out.truncate(out.trim_end().len());
    out.push('\n');
    for (v, w) in values.iter().zip(&widths) {
        let _ = write!(out, "{v:>w$}  ");
    }
    out.truncate(out.trim_end().len());
    out.push('\n');
    if report.skipped() > 0 || report.duplicates.iter().any(|&d| d > 0) {
        let _ = writeln!(
            out,
            "skipped (unseen in train): valid {}, test {}; duplicates dropped: train {}, valid {}, test {}",
            report.skipped_unseen[1], report.skipped_unseen[2], report.duplicates[0], report.duplicates[1], report.duplicates[2],
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn read(split: Split, text: &str, mode: LoadMode, store: &mut TripleStore) -> Result<LoadReport> {
        let mut report = LoadReport::default();
        read_split(store, &mut report, split, Cursor::new(text), Path::new("mem.txt"), mode)?;
        Ok(report)
    }

    #[test]
    fn parses_tab_separated_lines() {
        let mut store = TripleStore::new();
        read(Split::Train, "a\tr\tb\r\n\nb\tr\ta\na\tr\tb\n", LoadMode::Strict, &mut store).unwrap();
        assert_eq!(store.train().len(), 2);
        assert_eq!((store.num_entities(), store.num_relations()), (2, 1));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let mut store = TripleStore::new();
        let err = read(Split::Train, "a\tr\tb\na r b\n", LoadMode::Strict, &mut store).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("unexpected {e}"),
        }
        let err = read(Split::Train, "a\tr\tb\tc\n", LoadMode::Strict, &mut TripleStore::new()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn unseen_entities_strict_and_lenient() {
        let mut store = TripleStore::new();
        read(Split::Train, "a\tr\tb\n", LoadMode::Strict, &mut store).unwrap();
        let mut strict = store.clone();
        let err = read(Split::Test, "a\tr\tb\na\tr\tzz\n", LoadMode::Strict, &mut strict).unwrap_err();
        assert!(matches!(err, Error::Unseen { line: 2, what: "entity", .. }), "{err}");

        let report = read(Split::Test, "a\tr\tb\na\tr\tzz\nb\tq\ta\n", LoadMode::Lenient, &mut store).unwrap();
        assert_eq!(report.skipped_unseen[2], 2);
        assert_eq!(store.split(Split::Test).len(), 1);
    }

    #[test]
    fn round_trip_through_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut store = TripleStore::new();
        store.insert(Split::Train, "a", "r", "b", false);
        store.insert(Split::Train, "b", "s", "c", false);
        store.insert(Split::Valid, "c", "r", "a", false);
        store.insert(Split::Test, "a", "s", "c", false);
        write_dir(dir.path(), &store).unwrap();
        let (loaded, report) = load_dir(dir.path(), LoadMode::Strict).unwrap();
        assert_eq!(report.skipped(), 0);
        for split in Split::ALL {
            for &t in store.split(split) {
                let (h, r, tail) = store.decode(t).unwrap();
                let back = loaded.encode(h, r, tail).unwrap();
                assert_eq!(loaded.decode(back), Some((h, r, tail)));
                assert!(loaded.split(split).contains(&back));
            }
        }
        let table = stats_table("toy", &loaded, &report);
        assert!(table.lines().nth(1).unwrap().ends_with("1"));
    }

    #[test]
    fn missing_file_is_io_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_dir(dir.path(), LoadMode::Strict), Err(Error::Io { .. })));
    }
}
