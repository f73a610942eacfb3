//! Plain-text dumps of fields.

use std::fmt::Write as _;

use crate::network::Network;
use crate::solver::ScalarField;

/// `node,x,y,value` with blank coordinates when the network has none.
pub fn field_csv(net: &Network, field: &ScalarField) -> String {
    let mut out = String::from("node,x,y,value\n");
    for (x, v) in field.values().iter().enumerate() {
        match net.point(x) {
            Some([a, b]) => writeln!(out, "{x},{a:e},{b:e},{v:e}").unwrap(),
            None => writeln!(out, "{x},,,{v:e}").unwrap(),
        }
    }
    out
}
