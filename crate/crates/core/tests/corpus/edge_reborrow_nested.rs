// slice: edge-reborrow
// expect: accept
// rustc: ok
// run: 6
fn main() -> i32 {
    let mut x = 1;
    let m = &mut x;
    let r = &mut *m;
    *r = 5;
    *m = *m + 1;
    return x;
}
