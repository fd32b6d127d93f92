//! Tag-length-value framing: `u8 tag | be32 length | value`.
//!
//! Readers are strict. Fields must appear in the order the schema lists
//! them, unknown tags are rejected and trailing bytes are an error, so every
//! value has exactly one encoding.

use crate::error::Error;

pub(crate) struct TlvWriter {
    buf: Vec<u8>,
}

impl TlvWriter {
    pub(crate) fn new() -> Self {
        Self { buf: Vec::new() }
    }

    pub(crate) fn put(&mut self, tag: u8, value: &[u8]) -> &mut Self {
        self.buf.push(tag);
        self.buf
            .extend_from_slice(&(value.len() as u32).to_be_bytes());
        self.buf.extend_from_slice(value);
        self
    }

    pub(crate) fn put_u8(&mut self, tag: u8, v: u8) -> &mut Self {
        self.put(tag, &[v])
    }

    pub(crate) fn put_u64(&mut self, tag: u8, v: u64) -> &mut Self {
        self.put(tag, &v.to_be_bytes())
    }

    pub(crate) fn put_str(&mut self, tag: u8, v: &str) -> &mut Self {
        self.put(tag, v.as_bytes())
    }

    pub(crate) fn nested(&mut self, tag: u8, build: impl FnOnce(&mut TlvWriter)) -> &mut Self {
        let mut inner = TlvWriter::new();
        build(&mut inner);
        self.put(tag, &inner.buf)
    }

    pub(crate) fn finish(self) -> Vec<u8> {
        self.buf
    }
}

pub(crate) struct TlvReader<'a> {
    rest: &'a [u8],
    err: fn(String) -> Error,
}

impl<'a> TlvReader<'a> {
    pub(crate) fn new(bytes: &'a [u8], err: fn(String) -> Error) -> Self {
        Self { rest: bytes, err }
    }

    pub(crate) fn error(&self, msg: impl Into<String>) -> Error {
        (self.err)(msg.into())
    }

    fn peek_tag(&self) -> Option<u8> {
        self.rest.first().copied()
    }

    fn take(&mut self) -> Result<(u8, &'a [u8]), Error> {
        if self.rest.len() < 5 {
            return Err(self.error(format!(
                "truncated TLV header ({} bytes left)",
                self.rest.len()
            )));
        }
        let tag = self.rest[0];
        let len =
            u32::from_be_bytes([self.rest[1], self.rest[2], self.rest[3], self.rest[4]]) as usize;
        let body = &self.rest[5..];
        if body.len() < len {
            return Err(self.error(format!(
                "tag {tag:#04x} declares {len} bytes, {} available",
                body.len()
            )));
        }
        self.rest = &body[len..];
        Ok((tag, &body[..len]))
    }

    pub(crate) fn expect(&mut self, tag: u8) -> Result<&'a [u8], Error> {
        match self.peek_tag() {
            None => Err(self.error(format!("missing tag {tag:#04x}"))),
            Some(t) if t != tag => {
                Err(self.error(format!("expected tag {tag:#04x}, found {t:#04x}")))
            }
            Some(_) => Ok(self.take()?.1),
        }
    }

    pub(crate) fn optional(&mut self, tag: u8) -> Result<Option<&'a [u8]>, Error> {
        if self.peek_tag() == Some(tag) {
            Ok(Some(self.take()?.1))
        } else {
            Ok(None)
        }
    }

    /// Consumes consecutive fields carrying `tag`.
    pub(crate) fn repeated(&mut self, tag: u8) -> Result<Vec<&'a [u8]>, Error> {
        let mut out = Vec::new();
        while let Some(v) = self.optional(tag)? {
            out.push(v);
        }
        Ok(out)
    }

    pub(crate) fn expect_u8(&mut self, tag: u8) -> Result<u8, Error> {
        match self.expect(tag)? {
            [v] => Ok(*v),
            other => Err(self.error(format!(
                "tag {tag:#04x}: expected 1 byte, got {}",
                other.len()
            ))),
        }
    }

    pub(crate) fn expect_u64(&mut self, tag: u8) -> Result<u64, Error> {
        let v = self.expect(tag)?;
        let arr: [u8; 8] = v.try_into().map_err(|_| {
            self.error(format!("tag {tag:#04x}: expected 8 bytes, got {}", v.len()))
        })?;
        Ok(u64::from_be_bytes(arr))
    }

    pub(crate) fn utf8(&self, v: &[u8]) -> Result<String, Error> {
        String::from_utf8(v.to_vec()).map_err(|_| self.error("invalid utf-8 string"))
    }

    pub(crate) fn nested(&self, v: &'a [u8]) -> TlvReader<'a> {
        TlvReader::new(v, self.err)
    }

    pub(crate) fn finish(self) -> Result<(), Error> {
        match self.peek_tag() {
            None => Ok(()),
            Some(t) => Err(self.error(format!("unexpected tag {t:#04x}"))),
        }
    }
}
