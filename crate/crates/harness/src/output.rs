use std::path::PathBuf;

use crate::HarnessError;

#[derive(Clone, Debug, PartialEq)]
pub struct OutputFile {
    pub path: PathBuf,
    pub contents: String,
}

/// Writes every file, creating parent directories as needed.
pub fn write_files(files: &[OutputFile]) -> Result<(), HarnessError> {
    for f in files {
        if let Some(dir) = f.path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir)?;
        }
        std::fs::write(&f.path, &f.contents)?;
    }
    Ok(())
}

/// CSV text for `header` and `rows`, appended after the `#` header block.
pub(crate) fn csv_text(
    preamble: &str,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<String, HarnessError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| HarnessError::Io(std::io::Error::other(e));
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(&row).map_err(io)?;
    }
    let body = w
        .into_inner()
        .map_err(|e| HarnessError::Io(e.into_error()))?;
    let mut out = preamble.to_string();
    out.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
    Ok(out)
}
