// slice: accept
// expect: accept
// rustc: ok
// run: 4
enum List { Cons(i32, Box<List>), Nil }

fn len(l: &List) -> i32 {
    match *l {
        List::Cons(_, ref rest) => {
            return 1 + len(&**rest);
        }
        List::Nil => {
            return 0;
        }
    }
}

fn main() -> i32 {
    let mut l = List::Nil;
    let mut i = 0;
    while i < 4 {
        l = List::Cons(i, Box::new(l));
        i = i + 1;
    }
    return len(&l);
}
