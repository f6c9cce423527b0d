//! Fixed-length shift registers backed by a ring buffer, so shifting is O(1).

/// Number of data boxes in every register: 15 ms of history at 0.5 ms/tick.
pub const REGISTER_LEN: usize = 30;

/// A string of data boxes. Slot 0 is "now".
///
/// Two shift directions are supported because the two register roles read
/// time in opposite directions:
///
/// * [`ShiftRegister::advance`] treats the register as a schedule of pending
///   deviations: slot `k` is what will be present `k` ticks from now. Advancing
///   consumes slot 0 and moves every later slot one step closer. PSP registers
///   use this, so a kernel deposited at tick `t` contributes sample `k` at
///   tick `t + k`.
/// * [`ShiftRegister::shift_in`] treats it as a history: slot `k` moves to slot
///   `k + 1`, slot `L - 1` falls off, and the fill value lands in slot 0.
///   Calcium registers use this.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftRegister {
    buf: [f64; REGISTER_LEN],
    head: usize,
}

impl Default for ShiftRegister {
    fn default() -> Self {
        Self::new()
    }
}

impl ShiftRegister {
    pub fn new() -> Self {
        Self {
            buf: [0.0; REGISTER_LEN],
            head: 0,
        }
    }

    pub const fn len(&self) -> usize {
        REGISTER_LEN
    }

    pub const fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    fn index(&self, k: usize) -> usize {
        let i = self.head + k;
        if i >= REGISTER_LEN {
            i - REGISTER_LEN
        } else {
            i
        }
    }

    #[inline]
    pub fn get(&self, k: usize) -> f64 {
        self.buf[self.index(k)]
    }

    #[inline]
    pub fn set(&mut self, k: usize, value: f64) {
        let i = self.index(k);
        self.buf[i] = value;
    }

    #[inline]
    pub fn add(&mut self, k: usize, value: f64) {
        let i = self.index(k);
        self.buf[i] += value;
    }

    /// Current value (slot 0).
    #[inline]
    pub fn now(&self) -> f64 {
        self.buf[self.head]
    }

    /// Consumes slot 0, moves slot `k + 1` to slot `k`, writes `fill` into the
    /// last slot. Returns the consumed value.
    #[inline]
    pub fn advance(&mut self, fill: f64) -> f64 {
        let out = self.buf[self.head];
        self.buf[self.head] = fill;
        self.head = self.index(1);
        out
    }

    /// Moves slot `k` to slot `k + 1`, writes `fill` into slot 0. Returns the
    /// value discarded from the last slot.
    #[inline]
    pub fn shift_in(&mut self, fill: f64) -> f64 {
        self.head = self.index(REGISTER_LEN - 1);
        let out = self.buf[self.head];
        self.buf[self.head] = fill;
        out
    }

    pub fn reset(&mut self) {
        self.buf = [0.0; REGISTER_LEN];
        self.head = 0;
    }

    pub fn sum(&self) -> f64 {
        self.iter().sum()
    }

    /// Slots in order 0..L.
    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        (0..REGISTER_LEN).map(move |k| self.get(k))
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.iter().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.buf.iter().all(|&v| v == 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn from_slots(slots: &[f64]) -> ShiftRegister {
        let mut r = ShiftRegister::new();
        for (k, &v) in slots.iter().enumerate() {
            r.set(k, v);
        }
        r
    }

    #[test]
    fn shift_in_moves_toward_the_end() {
        let mut r = from_slots(&(0..30).map(|k| k as f64).collect::<Vec<_>>());
        let out = r.shift_in(-1.0);
        assert_eq!(out, 29.0);
        assert_eq!(r.get(0), -1.0);
        for k in 1..30 {
            assert_eq!(r.get(k), (k - 1) as f64);
        }
    }

    #[test]
    fn advance_moves_toward_now() {
        let mut r = from_slots(&(0..30).map(|k| k as f64).collect::<Vec<_>>());
        let out = r.advance(0.0);
        assert_eq!(out, 0.0);
        for k in 0..29 {
            assert_eq!(r.get(k), (k + 1) as f64);
        }
        assert_eq!(r.get(29), 0.0);
    }

    #[test]
    fn reset_zeroes_every_slot() {
        let mut r = from_slots(&[3.0; 30]);
        r.shift_in(1.0);
        r.reset();
        assert!(r.is_zero());
        assert_eq!(r.len(), REGISTER_LEN);
    }

    proptest! {
        #[test]
        fn matches_a_plain_vec_model(ops in prop::collection::vec((any::<bool>(), -5.0f64..5.0), 0..200)) {
            let mut r = ShiftRegister::new();
            let mut model = vec![0.0f64; REGISTER_LEN];
            for (forward, fill) in ops {
                if forward {
                    let out = r.shift_in(fill);
                    let expected = model.pop().unwrap();
                    model.insert(0, fill);
                    prop_assert_eq!(out, expected);
                } else {
                    let out = r.advance(fill);
                    let expected = model.remove(0);
                    model.push(fill);
                    prop_assert_eq!(out, expected);
                }
                prop_assert_eq!(r.to_vec(), model.clone());
            }
        }
    }
}
