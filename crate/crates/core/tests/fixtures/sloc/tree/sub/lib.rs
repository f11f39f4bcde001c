/// Doc comment.
fn f<'a>(s: &'a str) -> &'a str {
    // body
    s /* tail */
}
/*
 * block
 */

