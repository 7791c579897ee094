//! Newline-delimited JSON protocol spoken with heuristic worker processes.
//!
//! The worker greets with `{"ready":true,"proto":1}` and then answers each
//! request line with exactly one response line carrying the same id.

use roco_core::heuristic::{ArgValue, Failure};
use roco_core::Matrix;
use serde::{Deserialize, Serialize};

pub const PROTOCOL_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Handshake {
    pub ready: bool,
    pub proto: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "lowercase")]
pub enum WireValue {
    Matrix(Vec<Vec<f64>>),
    Vector(Vec<f64>),
    Scalar(f64),
}

impl From<&ArgValue> for WireValue {
    fn from(v: &ArgValue) -> Self {
        match v {
            ArgValue::Matrix(m) => WireValue::Matrix(m.to_rows()),
            ArgValue::Vector(v) => WireValue::Vector(v.clone()),
            ArgValue::Scalar(s) => WireValue::Scalar(*s),
        }
    }
}

impl TryFrom<WireValue> for ArgValue {
    type Error = Failure;

    fn try_from(v: WireValue) -> Result<Self, Failure> {
        match v {
            WireValue::Matrix(rows) => Matrix::from_rows(&rows)
                .map(ArgValue::Matrix)
                .ok_or_else(|| Failure::Shape("ragged matrix rows".into())),
            WireValue::Vector(v) => Ok(ArgValue::Vector(v)),
            WireValue::Scalar(s) => Ok(ArgValue::Scalar(s)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: u64,
    pub op: String,
    pub entry: String,
    pub source: String,
    pub args: Vec<WireValue>,
    pub timeout_s: f64,
}

impl Request {
    pub fn eval(id: u64, req: &roco_core::exec::ExecRequest) -> Self {
        Self {
            id,
            op: "eval".into(),
            entry: req.entry.clone(),
            source: req.source.clone(),
            args: req.args.iter().map(WireValue::from).collect(),
            timeout_s: req.timeout_s,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorType {
    Timeout,
    Exception,
    Shape,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WireError {
    #[serde(rename = "type")]
    pub kind: ErrorType,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Response {
    pub id: u64,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<WireValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<WireError>,
}

impl Response {
    /// Typed outcome of a response line.
    pub fn into_outcome(self) -> Result<(ArgValue, f64), Failure> {
        if self.ok {
            let value = self.result.ok_or_else(|| Failure::Shape("response has no result".into()))?;
            return Ok((ArgValue::try_from(value)?, self.elapsed_s.unwrap_or(0.0)));
        }
        let err = self.error.unwrap_or(WireError {
            kind: ErrorType::Exception,
            message: "failure without detail".into(),
        });
        Err(match err.kind {
            ErrorType::Timeout => Failure::Timeout,
            ErrorType::Exception => Failure::Exception(err.message),
            ErrorType::Shape if err.message == "non-finite" => Failure::NonFinite,
            ErrorType::Shape => Failure::Shape(err.message),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_wire_form() {
        let req = Request {
            id: 7,
            op: "eval".into(),
            entry: "h".into(),
            source: "def h(x): return x".into(),
            args: vec![WireValue::Matrix(vec![vec![1.5]]), WireValue::Scalar(2.0)],
            timeout_s: 1.0,
        };
        let line = serde_json::to_string(&req).unwrap();
        assert_eq!(
            line,
            r#"{"id":7,"op":"eval","entry":"h","source":"def h(x): return x","args":[{"kind":"matrix","data":[[1.5]]},{"kind":"scalar","data":2.0}],"timeout_s":1.0}"#
        );
    }

    #[test]
    fn response_failures_are_typed() {
        let parse = |s: &str| serde_json::from_str::<Response>(s).unwrap().into_outcome();
        assert_eq!(parse(r#"{"id":1,"ok":false,"error":{"type":"timeout","message":"t"}}"#), Err(Failure::Timeout));
        assert_eq!(
            parse(r#"{"id":1,"ok":false,"error":{"type":"shape","message":"non-finite"}}"#),
            Err(Failure::NonFinite)
        );
        assert!(matches!(
            parse(r#"{"id":1,"ok":false,"error":{"type":"exception","message":"ZeroDivisionError"}}"#),
            Err(Failure::Exception(m)) if m == "ZeroDivisionError"
        ));
        assert!(matches!(
            parse(r#"{"id":1,"ok":true,"result":{"kind":"matrix","data":[[1.0],[2.0,3.0]]},"elapsed_s":0.1}"#),
            Err(Failure::Shape(_))
        ));
        let (v, t) = parse(r#"{"id":1,"ok":true,"result":{"kind":"vector","data":[1,2,3]},"elapsed_s":0.25}"#).unwrap();
        assert_eq!(v, ArgValue::Vector(vec![1.0, 2.0, 3.0]));
        assert_eq!(t, 0.25);
    }

    #[test]
    fn large_matrix_round_trips_bitwise() {
        let mut x: u64 = 0x9e37_79b9_7f4a_7c15;
        let rows: Vec<Vec<f64>> = (0..200)
            .map(|_| {
                (0..200)
                    .map(|_| {
                        x ^= x << 13;
                        x ^= x >> 7;
                        x ^= x << 17;
                        (x >> 11) as f64 / (1u64 << 53) as f64 * 1e3
                    })
                    .collect()
            })
            .collect();
        let wire = WireValue::Matrix(rows.clone());
        let back: WireValue = serde_json::from_str(&serde_json::to_string(&wire).unwrap()).unwrap();
        let WireValue::Matrix(got) = back else { panic!() };
        assert!(got.iter().flatten().zip(rows.iter().flatten()).all(|(a, b)| a.to_bits() == b.to_bits()));
    }
}
