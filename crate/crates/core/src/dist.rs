use std::fmt;
use std::ops::Add;
use std::str::FromStr;

/// Hop count with a distinguished infinite value.
///
/// `INFINITE` orders above every finite value and absorbs addition.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Dist(u32);

impl Dist {
    pub const ZERO: Dist = Dist(0);
    pub const ONE: Dist = Dist(1);
    pub const INFINITE: Dist = Dist(u32::MAX);

    pub const fn new(hops: u32) -> Dist {
        assert!(hops != u32::MAX, "hop count collides with the infinite sentinel");
        Dist(hops)
    }

    #[inline]
    pub fn is_finite(self) -> bool {
        self.0 != u32::MAX
    }

    #[inline]
    pub fn is_infinite(self) -> bool {
        self.0 == u32::MAX
    }

    /// The finite hop count, if any.
    #[inline]
    pub fn finite(self) -> Option<u32> {
        self.is_finite().then_some(self.0)
    }

    #[inline]
    pub(crate) fn raw(self) -> u32 {
        self.0
    }

    /// `self - k`, floored at `floor`; infinite stays infinite.
    pub fn minus_floored(self, k: u32, floor: u32) -> Dist {
        match self.finite() {
            Some(d) => Dist(d.saturating_sub(k).max(floor)),
            None => self,
        }
    }

    /// Signed value, `None` for infinite.
    pub fn as_i64(self) -> Option<i64> {
        self.finite().map(i64::from)
    }
}

impl Add<u32> for Dist {
    type Output = Dist;

    #[inline]
    fn add(self, rhs: u32) -> Dist {
        if self.is_infinite() {
            return self;
        }
        match self.0.checked_add(rhs) {
            Some(v) if v != u32::MAX => Dist(v),
            _ => Dist::INFINITE,
        }
    }
}

impl Add for Dist {
    type Output = Dist;

    #[inline]
    fn add(self, rhs: Dist) -> Dist {
        if rhs.is_infinite() {
            return rhs;
        }
        self + rhs.0
    }
}

impl From<u32> for Dist {
    fn from(v: u32) -> Self {
        Dist::new(v)
    }
}

impl fmt::Debug for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.finite() {
            Some(d) => write!(f, "{d}"),
            None => f.write_str("inf"),
        }
    }
}

impl FromStr for Dist {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("inf") {
            return Ok(Dist::INFINITE);
        }
        let v: u32 = s.parse()?;
        if v == u32::MAX {
            // u32::MAX is reserved; treat the literal the same as "inf"
            return Ok(Dist::INFINITE);
        }
        Ok(Dist(v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinite_orders_last_and_absorbs() {
        assert!(Dist::new(1_000_000) < Dist::INFINITE);
        assert_eq!(Dist::INFINITE + 3, Dist::INFINITE);
        assert_eq!(Dist::new(2) + Dist::INFINITE, Dist::INFINITE);
        assert_eq!(Dist::new(2) + 3, Dist::new(5));
    }

    #[test]
    fn floored_subtraction() {
        assert_eq!(Dist::new(5).minus_floored(2, 1), Dist::new(3));
        assert_eq!(Dist::new(2).minus_floored(2, 1), Dist::new(1));
        assert_eq!(Dist::INFINITE.minus_floored(2, 1), Dist::INFINITE);
    }

    #[test]
    fn text_round_trip() {
        for d in [Dist::ZERO, Dist::new(17), Dist::INFINITE] {
            assert_eq!(d.to_string().parse::<Dist>().unwrap(), d);
        }
    }
}
