//! Fixed numerical constants (standard values, 20+ significant digits).

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_402_43;

/// `exp(EULER_GAMMA)`.
pub const EXP_GAMMA: f64 = 1.781_072_417_990_197_985_236_504_103_107_179_5;

/// `exp(-EULER_GAMMA)`, the limit of the Buchstab function.
pub const EXP_NEG_GAMMA: f64 = 0.561_459_483_566_885_169_824_143_214_790_880_8;

/// Golomb–Dickman constant, used only as a reference value in reports.
pub const GOLOMB_DICKMAN: f64 = 0.624_329_988_543_550_870_992_936_383_100_837_2;

/// Golden ratio.
pub const GOLDEN_RATIO: f64 = 1.618_033_988_749_894_848_204_586_834_365_638_1;
