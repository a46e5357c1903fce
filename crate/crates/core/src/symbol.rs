/// A text symbol: the conceptual sentinel or a byte shifted up by one.
pub type Symbol = u16;

/// The end-of-text marker, smaller than every byte.
pub const SENTINEL: Symbol = 0;

/// Number of distinct symbols (sentinel plus 256 bytes).
pub const ALPHABET: usize = 257;

#[inline]
pub const fn sym(b: u8) -> Symbol {
    b as Symbol + 1
}
