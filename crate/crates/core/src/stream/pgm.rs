use std::fs;
use std::path::Path;

use super::{Frame, StreamError};

fn skip_space_and_comments(data: &[u8], mut pos: usize) -> usize {
    loop {
        while pos < data.len() && data[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < data.len() && data[pos] == b'#' {
            while pos < data.len() && data[pos] != b'\n' {
                pos += 1;
            }
        } else {
            return pos;
        }
    }
}

fn read_uint(data: &[u8], pos: usize, what: &str) -> Result<(u32, usize), StreamError> {
    let start = skip_space_and_comments(data, pos);
    let mut end = start;
    while end < data.len() && data[end].is_ascii_digit() {
        end += 1;
    }
    if end == start {
        return Err(StreamError::MalformedHeader(format!("missing {what}")));
    }
    let text = std::str::from_utf8(&data[start..end]).expect("ascii digits");
    let value = text
        .parse()
        .map_err(|_| StreamError::MalformedHeader(format!("{what} {text} out of range")))?;
    Ok((value, end))
}

/// Parses a binary (P5) PGM with maxval 255.
pub fn parse_pgm(data: &[u8]) -> Result<Frame, StreamError> {
    if data.len() < 2 {
        return Err(StreamError::MalformedHeader("file too short".into()));
    }
    match &data[..2] {
        b"P5" => {}
        m if m[0] == b'P' => {
            return Err(StreamError::UnsupportedFormat(String::from_utf8_lossy(m).into_owned()))
        }
        _ => return Err(StreamError::MalformedHeader("missing P5 magic".into())),
    }
    let (width, pos) = read_uint(data, 2, "width")?;
    let (height, pos) = read_uint(data, pos, "height")?;
    let (maxval, pos) = read_uint(data, pos, "maxval")?;
    if maxval != 255 {
        return Err(StreamError::MaxVal(maxval));
    }
    if pos >= data.len() || !data[pos].is_ascii_whitespace() {
        return Err(StreamError::MalformedHeader("no separator after maxval".into()));
    }
    let body = &data[pos + 1..];
    let needed = width as usize * height as usize;
    if body.len() < needed {
        return Err(StreamError::Truncated { needed, found: body.len() });
    }
    Frame::new(width as usize, height as usize, body[..needed].to_vec())
}

pub fn write_pgm(frame: &Frame) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", frame.width, frame.height).into_bytes();
    out.extend_from_slice(&frame.pixels);
    out
}

pub fn load_pgm(path: impl AsRef<Path>) -> Result<Frame, StreamError> {
    parse_pgm(&fs::read(path)?)
}

pub fn save_pgm(frame: &Frame, path: impl AsRef<Path>) -> Result<(), StreamError> {
    fs::write(path, write_pgm(frame))?;
    Ok(())
}
