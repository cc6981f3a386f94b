// slice: reject
// expect: reject RL0206
// rustc: E0515
struct S { v: i32 }

fn make<'a>(r: &'a S) -> &'a i32 {
    let s = S { v: r.v };
    return &s.v;
}
