//! The guide's chapters, compiled as doctests so every listing in `book/`
//! is built and run by `cargo test`. One module per chapter keeps failures
//! traceable to their file.

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
mod introduction {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/recordings.md")]
mod recordings {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/timing.md")]
mod timing {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/fretboard.md")]
mod fretboard {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/similarity.md")]
mod similarity {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/roles.md")]
mod roles {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/rendering.md")]
mod rendering {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/catalog.md")]
mod catalog {}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/sample-data.md")]
mod sample_data {}
