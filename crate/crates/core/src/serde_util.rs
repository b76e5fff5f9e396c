use serde::Serializer;

use crate::numkit::rational::format_rational;
use crate::numkit::Rational;

pub fn rational_str<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format_rational(r))
}
