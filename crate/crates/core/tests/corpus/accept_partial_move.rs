// slice: accept
// expect: accept
// rustc: ok
// run: 11
struct Pair { a: Box<i32>, b: i32 }

fn take(b: Box<i32>) -> i32 {
    return *b;
}

fn main() -> i32 {
    let p = Pair { a: Box::new(5), b: 6 };
    let n = take(p.a);
    return n + p.b;
}
