//! Numeric CSV columns for user-supplied profile tables.

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
#[error("line {line}: {msg}")]
pub struct ColumnsError {
    pub line: usize,
    pub msg: String,
}

/// Parses `ncols` numeric columns; a non-numeric first record is a header and
/// `#` starts a comment line.
pub fn read_columns(text: &str, ncols: usize) -> Result<Vec<Vec<f64>>, ColumnsError> {
    let mut cols = vec![Vec::new(); ncols];
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(text.as_bytes());
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| ColumnsError { line: i + 1, msg: e.to_string() })?;
        let line = rec.position().map_or(i + 1, |p| p.line() as usize);
        if rec.len() != ncols {
            return Err(ColumnsError { line, msg: format!("expected {ncols} columns, got {}", rec.len()) });
        }
        let parsed: Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(v) => v.into_iter().zip(cols.iter_mut()).for_each(|(x, c)| c.push(x)),
            Err(_) if i == 0 => continue,
            Err(e) => return Err(ColumnsError { line, msg: format!("{e}") }),
        }
    }
    Ok(cols)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_comments_and_errors() {
        let cols = read_columns("r,k\n# note\n1, 2\n3,4\n", 2).unwrap();
        assert_eq!(cols, vec![vec![1.0, 3.0], vec![2.0, 4.0]]);
        assert_eq!(read_columns("1,2\n3\n", 2).unwrap_err().line, 2);
        assert_eq!(read_columns("1,2\n3,x\n", 2).unwrap_err().line, 2);
    }
}
