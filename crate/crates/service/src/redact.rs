use serde_json::Value;

use crate::activity::{hidden_fields, Activity, Role};

/// Remove every object key in `hidden`, at any depth.
pub fn scrub(value: &mut Value, hidden: &[&str]) {
    match value {
        Value::Object(m) => {
            m.retain(|k, _| !hidden.contains(&k.as_str()));
            m.values_mut().for_each(|v| scrub(v, hidden));
        }
        Value::Array(a) => a.iter_mut().for_each(|v| scrub(v, hidden)),
        _ => {}
    }
}

pub fn redact(mut value: Value, activity: Activity, role: Role) -> Value {
    scrub(&mut value, hidden_fields(activity, role));
    value
}

/// JSON-pointer-style paths of hidden keys present in `value`.
pub fn find_hidden(value: &Value, hidden: &[&str]) -> Vec<String> {
    fn walk(v: &Value, path: &mut String, hidden: &[&str], out: &mut Vec<String>) {
        let len = path.len();
        match v {
            Value::Object(m) => {
                for (k, child) in m {
                    path.push('/');
                    path.push_str(k);
                    if hidden.contains(&k.as_str()) {
                        out.push(path.clone());
                    }
                    walk(child, path, hidden, out);
                    path.truncate(len);
                }
            }
            Value::Array(a) => {
                for (i, child) in a.iter().enumerate() {
                    path.push_str(&format!("/{i}"));
                    walk(child, path, hidden, out);
                    path.truncate(len);
                }
            }
            _ => {}
        }
    }
    let mut out = Vec::new();
    walk(value, &mut String::new(), hidden, &mut out);
    out
}
