//! Shared sample sources for unit tests.

pub const TREIBER: &str = r#"
library treiber datatype stack

table Node(Val, Next init NULL)
global Top init NULL

method push(a) {
  n = new(Node);
  n.Val = a;
  done = 0;
  while (done == 0) {
    t = Top;
    n.Next = t;
    done = CAS(Top, t, n);
  }
  return;
}

method pop(a) {
  res = EMPTY;
  done = 0;
  while (done == 0) {
    t = Top;
    if (t == NULL) {
      done = 1;
    } else {
      v = t.Val;
      nxt = t.Next;
      c = CAS(Top, t, nxt);
      if (c == 1) {
        res = v;
        done = 1;
      }
    }
  }
  return res;
}
"#;
