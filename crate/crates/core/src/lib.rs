//! Block-DCT compression for still images, video, and volumetric data.
//!
//! Still images go through a per-block 2D pipeline; monochrome video, 4:2:0
//! color video, and volumes go through a cubic 3D pipeline over groups of
//! eight frames or slices:
//!
//! ```text
//! samples -> pad -> DCT -> quantize -> scan -> tokens -> Huffman -> container
//!                                                                      |
//! samples <- crop <- inverse DCT <- dequantize <- unscan <- decode <----+
//! ```
//!
//! [`transform`] holds the forward and inverse transforms, [`quant`] the step
//! tables and the 3D quantization cube, [`scan`] the coefficient orders,
//! [`entropy`] the Huffman layer, [`codec`] the per-mode pipelines and the
//! container, [`io_media`] the file formats, and [`metrics`] the quality and
//! rate measurements.

pub mod bits;
pub mod codec;
pub mod entropy;
pub mod error;
pub mod io_media;
pub mod metrics;
pub mod quant;
pub mod scan;
pub mod transform;

pub use codec::{CodecMode, EncodedStream, Frame, StreamHeader, VideoCube, Volume};
pub use error::{Error, Result};
pub use quant::{QualityFactor, QuantCube, QuantTable};
pub use transform::{Block2d, Block3d, DctBasis};
