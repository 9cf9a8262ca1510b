use std::io::{self, BufRead, Write};

use crate::options::parse_yes_no;

/// Question/answer channel. Reads from any line source so sessions can be
/// scripted; every question is echoed to `out`.
pub struct Prompter<'a> {
    input: Box<dyn BufRead + 'a>,
    pub out: Box<dyn Write + 'a>,
}

impl<'a> Prompter<'a> {
    pub fn new(input: impl BufRead + 'a, out: impl Write + 'a) -> Self {
        Prompter { input: Box::new(input), out: Box::new(out) }
    }

    pub fn say(&mut self, text: &str) -> io::Result<()> {
        writeln!(self.out, "{text}")
    }

    /// Prints `question` and reads one trimmed line; `None` once input ends.
    pub fn ask(&mut self, question: &str) -> io::Result<Option<String>> {
        writeln!(self.out, "{question}")?;
        self.out.flush()?;
        let mut line = String::new();
        if self.input.read_line(&mut line)? == 0 {
            return Ok(None);
        }
        Ok(Some(line.trim().to_string()))
    }

    /// Repeats `question` until the answer is yes or no; end of input is no.
    pub fn ask_yes_no(&mut self, question: &str) -> io::Result<bool> {
        loop {
            match self.ask(question)? {
                None => return Ok(false),
                Some(a) => match parse_yes_no(&a) {
                    Some(v) => return Ok(v),
                    None => self.say("Please answer yes or no.")?,
                },
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scripted_answers() {
        let mut out = Vec::new();
        {
            let mut p = Prompter::new("  maybe \nYES\nsecond\n".as_bytes(), &mut out);
            assert!(p.ask_yes_no("Save?").unwrap());
            assert_eq!(p.ask("Name?").unwrap().as_deref(), Some("second"));
            assert_eq!(p.ask("More?").unwrap(), None);
            assert!(!p.ask_yes_no("Again?").unwrap());
        }
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.matches("Save?").count(), 2);
        assert!(text.contains("Please answer yes or no."));
    }
}
