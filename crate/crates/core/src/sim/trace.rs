use std::fmt::Display;
use std::io::{self, Write};

/// Optional event log, one `cycle,unit,event,detail` record per event.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    enabled: bool,
    lines: Vec<String>,
}

pub const TRACE_HEADER: &str = "cycle,unit,event,detail";

impl Trace {
    pub fn new(enabled: bool) -> Self {
        Self {
            enabled,
            lines: Vec::new(),
        }
    }

    pub fn enabled(&self) -> bool {
        self.enabled
    }

    pub fn log(&mut self, cycle: u64, unit: &str, event: &str, detail: impl Display) {
        if self.enabled {
            let detail = detail.to_string().replace(',', ";");
            self.lines.push(format!("{cycle},{unit},{event},{detail}"));
        }
    }

    pub fn lines(&self) -> &[String] {
        &self.lines
    }

    pub fn append(&mut self, other: Trace) {
        self.lines.extend(other.lines);
    }

    /// Appends `other` with `tag` prefixed to each unit name.
    pub fn append_tagged(&mut self, other: Trace, tag: &str) {
        self.lines.extend(other.lines.into_iter().map(|l| match l.split_once(',') {
            Some((cycle, rest)) => format!("{cycle},{tag}{rest}"),
            None => l,
        }));
    }

    /// Stable sort by cycle, keeping the order of events within a cycle.
    pub fn sort_by_cycle(&mut self) {
        self.lines
            .sort_by_key(|l| l.split(',').next().and_then(|c| c.parse::<u64>().ok()).unwrap_or(0));
    }

    /// Events of one kind, as `(cycle, unit, detail)`.
    pub fn events<'a>(&'a self, event: &'a str) -> impl Iterator<Item = (u64, &'a str, &'a str)> {
        self.lines.iter().filter_map(move |l| {
            let mut parts = l.splitn(4, ',');
            let cycle = parts.next()?.parse().ok()?;
            let unit = parts.next()?;
            (parts.next()? == event).then_some(())?;
            Some((cycle, unit, parts.next().unwrap_or("")))
        })
    }

    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "{TRACE_HEADER}")?;
        for l in &self.lines {
            writeln!(out, "{l}")?;
        }
        Ok(())
    }
}
