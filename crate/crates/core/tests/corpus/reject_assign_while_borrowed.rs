// slice: reject
// expect: reject RL0203
// rustc: E0506
fn main() -> i32 {
    let mut x = 1;
    let r = &x;
    x = 2;
    return *r;
}
