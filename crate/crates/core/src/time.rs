//! Time points at day, year or abstract-tick granularity.
//!
//! Every time point denotes an interval: a day, a whole year, or one tick.
//! Points of one granularity are totally ordered; a year and a day compare
//! by containment and are unordered when the year contains the day.

use std::cmp::Ordering;
use std::fmt;

use chrono::{Datelike, Days, NaiveDate};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TimePoint {
    Day(NaiveDate),
    Year(i32),
    Tick(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TimeError {
    #[error("invalid time literal `{0}`")]
    Invalid(String),
    #[error("9999-12-31 is reserved as the open-end marker")]
    Reserved,
    #[error("time {0} shifted by {1} units is out of range")]
    Overflow(TimePoint, u64),
}

/// Position on a common axis. Calendar time is in days from the common era;
/// ticks live on their own axis, ordered after all calendar time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Instant {
    abstract_axis: bool,
    value: i128,
}

impl TimePoint {
    pub fn sentinel() -> Self {
        TimePoint::Day(NaiveDate::from_ymd_opt(9999, 12, 31).expect("valid date"))
    }

    pub fn day(y: i32, m: u32, d: u32) -> Self {
        TimePoint::Day(NaiveDate::from_ymd_opt(y, m, d).expect("valid date"))
    }

    /// Parses `YYYY-MM-DD`, `YYYY` (exactly four digits) or any other run
    /// of digits as a tick. The sentinel day is rejected.
    pub fn parse(text: &str) -> Result<Self, TimeError> {
        let invalid = || TimeError::Invalid(text.to_string());
        if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit() || b == b'-') {
            return Err(invalid());
        }
        if text.contains('-') {
            let parts: Vec<&str> = text.split('-').collect();
            if parts.len() != 3 || parts[0].len() != 4 || parts[1].len() != 2 || parts[2].len() != 2 {
                return Err(invalid());
            }
            let date = NaiveDate::parse_from_str(text, "%Y-%m-%d").map_err(|_| invalid())?;
            let point = TimePoint::Day(date);
            if point == Self::sentinel() {
                return Err(TimeError::Reserved);
            }
            return Ok(point);
        }
        if text.len() == 4 {
            return Ok(TimePoint::Year(text.parse().map_err(|_| invalid())?));
        }
        Ok(TimePoint::Tick(text.parse().map_err(|_| invalid())?))
    }

    pub fn granularity(&self) -> &'static str {
        match self {
            TimePoint::Day(_) => "day",
            TimePoint::Year(_) => "year",
            TimePoint::Tick(_) => "tick",
        }
    }

    pub fn start(&self) -> Instant {
        match *self {
            TimePoint::Day(d) => Instant::calendar(d),
            TimePoint::Year(y) => Instant::calendar(year_start(y)),
            TimePoint::Tick(t) => Instant {
                abstract_axis: true,
                value: t as i128,
            },
        }
    }

    /// Exclusive end of the denoted interval.
    pub fn end(&self) -> Instant {
        match *self {
            TimePoint::Day(d) => Instant {
                abstract_axis: false,
                value: Instant::calendar(d).value + 1,
            },
            TimePoint::Year(y) => Instant::calendar(year_start(y + 1)),
            TimePoint::Tick(t) => Instant {
                abstract_axis: true,
                value: t as i128 + 1,
            },
        }
    }

    /// Total order used for sorting: start, then end, so a year sorts before
    /// the days it contains.
    pub fn sort_key(&self) -> (Instant, Instant) {
        (self.start(), self.end())
    }

    /// Moves the point forward by `units` of its own granularity.
    pub fn shifted(&self, units: u64) -> Result<TimePoint, TimeError> {
        let overflow = || TimeError::Overflow(*self, units);
        match *self {
            TimePoint::Day(d) => d
                .checked_add_days(Days::new(units))
                .map(TimePoint::Day)
                .ok_or_else(overflow),
            TimePoint::Year(y) => i32::try_from(units)
                .ok()
                .and_then(|u| y.checked_add(u))
                .filter(|y| NaiveDate::from_ymd_opt(*y + 1, 1, 1).is_some())
                .map(TimePoint::Year)
                .ok_or_else(overflow),
            TimePoint::Tick(t) => t.checked_add(units).map(TimePoint::Tick).ok_or_else(overflow),
        }
    }

    pub fn contains(&self, other: &TimePoint) -> bool {
        self.start() <= other.start() && other.end() <= self.end()
    }
}

fn year_start(y: i32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, 1, 1).unwrap_or(if y < 0 { NaiveDate::MIN } else { NaiveDate::MAX })
}

impl Instant {
    fn calendar(d: NaiveDate) -> Self {
        Instant {
            abstract_axis: false,
            value: d.num_days_from_ce() as i128,
        }
    }
}

impl PartialOrd for TimePoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self == other {
            return Some(Ordering::Equal);
        }
        if self.start().abstract_axis != other.start().abstract_axis {
            return None;
        }
        if self.end() <= other.start() {
            Some(Ordering::Less)
        } else if other.end() <= self.start() {
            Some(Ordering::Greater)
        } else {
            None
        }
    }
}

impl fmt::Display for TimePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimePoint::Day(d) => write!(f, "{}", d.format("%Y-%m-%d")),
            TimePoint::Year(y) => write!(f, "{y:04}"),
            // four digits would read back as a year
            TimePoint::Tick(t) if (1000..10000).contains(t) => write!(f, "0{t}"),
            TimePoint::Tick(t) => write!(f, "{t}"),
        }
    }
}

/// Value bound to an attribute thimac.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Literal {
    Int(i64),
    Text(String),
}

impl Literal {
    /// Quoted form used in model text and ledger dumps.
    pub fn to_source(&self) -> String {
        match self {
            Literal::Int(n) => n.to_string(),
            Literal::Text(s) => quote(s),
        }
    }
}

/// Bare form used in table cells.
impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Int(n) => write!(f, "{n}"),
            Literal::Text(s) => f.write_str(s),
        }
    }
}

impl From<i64> for Literal {
    fn from(n: i64) -> Self {
        Literal::Int(n)
    }
}

impl From<&str> for Literal {
    fn from(s: &str) -> Self {
        Literal::Text(s.to_string())
    }
}

pub(crate) fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
