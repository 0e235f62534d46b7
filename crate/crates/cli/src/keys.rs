//! Newline-delimited key files.

use std::fs;
use std::path::Path;

use crate::error::CliError;

/// Splits `data` on `\n`. A trailing newline does not start an extra key,
/// and a final line without one is still a key. Other bytes, including
/// `\r`, are part of the key.
pub fn split_keys(data: &[u8]) -> Vec<&[u8]> {
    if data.is_empty() {
        return Vec::new();
    }
    let body = data.strip_suffix(b"\n").unwrap_or(data);
    body.split(|&b| b == b'\n').collect()
}

pub fn read_file(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}
