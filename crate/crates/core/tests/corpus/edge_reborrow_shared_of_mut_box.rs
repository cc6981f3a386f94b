// slice: edge-reborrow
// expect: accept
// rustc: ok
// run: 8
fn main() -> i32 {
    let mut b = Box::new(4);
    let m = &mut b;
    let r = &**m;
    let v = *r;
    **m = v * 2;
    return *b;
}
