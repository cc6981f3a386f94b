// slice: accept
// expect: accept
// rustc: ok
// run: 7
fn main() -> i32 {
    let bb = Box::new(Box::new(6));
    let inner = *bb;
    return *inner + 1;
}
