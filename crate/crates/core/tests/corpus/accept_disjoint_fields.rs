// slice: accept
// expect: accept
// rustc: ok
// run: 30
struct S { a: i32, b: i32 }

fn main() -> i32 {
    let mut s = S { a: 1, b: 2 };
    let ra = &mut s.a;
    let rb = &mut s.b;
    *ra = 10;
    *rb = 20;
    return s.a + s.b;
}
