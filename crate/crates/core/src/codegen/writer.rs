use std::fmt::Write as _;

/// Line-oriented text buffer with a current indentation level.
pub(crate) struct Writer {
    buf: String,
    level: usize,
    unit: String,
}

impl Writer {
    pub fn new(indent: usize, level: usize) -> Self {
        Writer {
            buf: String::new(),
            level,
            unit: " ".repeat(indent),
        }
    }

    pub fn line(&mut self, text: impl AsRef<str>) {
        let text = text.as_ref();
        if text.is_empty() {
            self.buf.push('\n');
            return;
        }
        for _ in 0..self.level {
            self.buf.push_str(&self.unit);
        }
        self.buf.push_str(text);
        self.buf.push('\n');
    }

    /// Preprocessor lines always start in column 0.
    pub fn directive(&mut self, text: impl AsRef<str>) {
        let _ = writeln!(self.buf, "{}", text.as_ref());
    }

    pub fn blank(&mut self) {
        self.buf.push('\n');
    }

    pub fn open(&mut self, text: impl AsRef<str>) {
        self.line(text);
        self.level += 1;
    }

    pub fn close(&mut self, text: impl AsRef<str>) {
        self.level -= 1;
        self.line(text);
    }

    pub fn indent(&mut self) {
        self.level += 1;
    }

    pub fn dedent(&mut self) {
        self.level -= 1;
    }

    pub fn finish(self) -> String {
        self.buf
    }
}
