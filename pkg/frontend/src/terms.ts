// Term JSON as the service emits it: compounds {c, a}, integers {n},
// strings {s}, unbound variables {v}.  Lists arrive as cons cells
// named "." with a "[]" nil.

export type TermJson =
  | { c: string; a: TermJson[] }
  | { n: number }
  | { s: string }
  | { v: string };

export function isCompound(
  t: TermJson,
  name?: string,
  arity?: number,
): t is { c: string; a: TermJson[] } {
  if (!("c" in t)) return false;
  if (name !== undefined && t.c !== name) return false;
  if (arity !== undefined && t.a.length !== arity) return false;
  return true;
}

export function intOf(t: TermJson): number | null {
  return "n" in t ? t.n : null;
}

export function strOf(t: TermJson): string | null {
  return "s" in t ? t.s : null;
}

/** Unpack user("name") to "name". */
export function userNameOf(t: TermJson): string | null {
  if (!isCompound(t, "user", 1)) return null;
  return strOf(t.a[0]);
}

/** Walk a cons list into an array; null when the spine is not a list. */
export function listOf(t: TermJson): TermJson[] | null {
  const out: TermJson[] = [];
  let cur = t;
  while (isCompound(cur, ".", 2)) {
    out.push(cur.a[0]);
    cur = cur.a[1];
  }
  if (!isCompound(cur, "[]", 0)) return null;
  return out;
}

/**
 * Plain-text rendering of a term, used for elements the client has no
 * dedicated card for.  Mirrors the server's printer closely enough for
 * display; it is never sent back.
 */
export function termText(t: TermJson): string {
  if ("n" in t) return String(t.n);
  if ("s" in t) return JSON.stringify(t.s);
  if ("v" in t) return t.v;
  const items = listOf(t);
  if (items !== null) return "[" + items.map(termText).join(", ") + "]";
  if (t.a.length === 0) return t.c;
  return t.c + "(" + t.a.map(termText).join(", ") + ")";
}
