//! JSONL reading and writing.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::corpus::{parse_line, Document, SectionKeywordMap};
use crate::error::{Error, Result};

/// Non-blank lines of a file with their 1-based line numbers.
pub struct JsonlLines {
    path: PathBuf,
    lines: std::io::Lines<BufReader<File>>,
    line_no: usize,
}

impl JsonlLines {
    pub fn open(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(JsonlLines {
            path: path.to_path_buf(),
            lines: BufReader::new(file).lines(),
            line_no: 0,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

impl Iterator for JsonlLines {
    type Item = Result<(usize, String)>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = self.lines.next()?;
            self.line_no += 1;
            match line {
                Err(e) => return Some(Err(Error::io(&self.path, e))),
                Ok(l) if l.trim().is_empty() => continue,
                Ok(l) => return Some(Ok((self.line_no, l))),
            }
        }
    }
}

pub(crate) fn at_line(path: &Path, line: usize, err: Error) -> Error {
    Error::Line {
        path: path.to_path_buf(),
        line,
        source: Box::new(err),
    }
}

pub fn read_documents(path: &Path, keywords: &SectionKeywordMap) -> Result<Vec<Document>> {
    JsonlLines::open(path)?
        .map(|item| {
            let (n, line) = item?;
            parse_line(&line, keywords).map_err(|e| at_line(path, n, e))
        })
        .collect()
}

pub fn read_records<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    JsonlLines::open(path)?
        .map(|item| {
            let (n, line) = item?;
            serde_json::from_str(&line).map_err(|e| at_line(path, n, e.into()))
        })
        .collect()
}

pub fn create_writer(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    Ok(BufWriter::new(
        File::create(path).map_err(|e| Error::io(path, e))?,
    ))
}

pub fn write_line<T: Serialize>(out: &mut impl Write, record: &T, path: &Path) -> Result<()> {
    serde_json::to_writer(&mut *out, record)?;
    out.write_all(b"\n").map_err(|e| Error::io(path, e))
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let mut out = create_writer(path)?;
    for r in records {
        write_line(&mut out, r, path)?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Lines handled per parallel chunk when streaming.
pub const CHUNK_LINES: usize = 256;

/// Streams `input` through `f` in parallel chunks, writing each returned line
/// (if any) to `output` in input order. Errors carry the failing line number.
pub fn map_lines<F>(input: &Path, output: &Path, f: F) -> Result<usize>
where
    F: Fn(&str) -> Result<Option<String>> + Sync,
{
    let mut out = create_writer(output)?;
    let mut lines = JsonlLines::open(input)?;
    let mut written = 0;
    loop {
        let chunk: Vec<(usize, String)> =
            lines.by_ref().take(CHUNK_LINES).collect::<Result<_>>()?;
        if chunk.is_empty() {
            break;
        }
        let mapped: Vec<Option<String>> = chunk
            .par_iter()
            .map(|(n, line)| f(line).map_err(|e| at_line(input, *n, e)))
            .collect::<Result<_>>()?;
        for line in mapped.into_iter().flatten() {
            out.write_all(line.as_bytes())
                .and_then(|_| out.write_all(b"\n"))
                .map_err(|e| Error::io(output, e))?;
            written += 1;
        }
    }
    out.flush().map_err(|e| Error::io(output, e))?;
    Ok(written)
}
