/**
 * Minimal reader/writer for the QML wire format (an XML subset).
 *
 * Self-contained so it runs in the browser and under node-based tests
 * alike; handles exactly what the service emits and accepts: elements,
 * double-quoted attributes, self-closing tags, the five standard
 * entities, and ignorable whitespace text.
 */

export interface XmlNode {
  tag: string;
  attrs: Record<string, string>;
  children: XmlNode[];
}

const ENTITIES: Record<string, string> = {
  "&amp;": "&",
  "&lt;": "<",
  "&gt;": ">",
  "&quot;": '"',
  "&apos;": "'",
};

function decodeEntities(text: string): string {
  return text.replace(/&(amp|lt|gt|quot|apos);/g, (m) => ENTITIES[m]);
}

export function escapeAttr(value: string): string {
  return value
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export class QmlSyntaxError extends Error {
  constructor(message: string, readonly offset: number) {
    super(`${message} (at offset ${offset})`);
  }
}

/** Parse a QML document into an element tree; throws QmlSyntaxError. */
export function parseXml(text: string): XmlNode {
  let pos = 0;

  const fail = (message: string): never => {
    throw new QmlSyntaxError(message, pos);
  };

  const skipMisc = () => {
    for (;;) {
      while (pos < text.length && /\s/.test(text[pos])) pos++;
      if (text.startsWith("<?", pos)) {
        const end = text.indexOf("?>", pos);
        if (end < 0) fail("unterminated processing instruction");
        pos = end + 2;
      } else if (text.startsWith("<!--", pos)) {
        const end = text.indexOf("-->", pos);
        if (end < 0) fail("unterminated comment");
        pos = end + 3;
      } else {
        return;
      }
    }
  };

  const readName = (): string => {
    const m = /^[A-Za-z_][\w.-]*/.exec(text.slice(pos));
    if (!m) fail("expected a name");
    pos += m![0].length;
    return m![0];
  };

  const readElement = (): XmlNode => {
    if (text[pos] !== "<") fail("expected '<'");
    pos++;
    const tag = readName();
    const attrs: Record<string, string> = {};
    for (;;) {
      while (pos < text.length && /\s/.test(text[pos])) pos++;
      if (text.startsWith("/>", pos)) {
        pos += 2;
        return { tag, attrs, children: [] };
      }
      if (text[pos] === ">") {
        pos++;
        break;
      }
      const name = readName();
      if (text[pos] !== "=") fail(`attribute ${name} needs a value`);
      pos++;
      if (text[pos] !== '"') fail("attribute values must be double-quoted");
      pos++;
      const end = text.indexOf('"', pos);
      if (end < 0) fail("unterminated attribute value");
      attrs[name] = decodeEntities(text.slice(pos, end));
      pos = end + 1;
    }
    const children: XmlNode[] = [];
    for (;;) {
      const textStart = pos;
      while (pos < text.length && text[pos] !== "<") pos++;
      if (pos >= text.length) fail(`unclosed <${tag}>`);
      if (text.slice(textStart, pos).trim() !== "") {
        pos = textStart;
        fail(`unexpected text content in <${tag}>`);
      }
      if (text.startsWith("<!--", pos)) {
        const end = text.indexOf("-->", pos);
        if (end < 0) fail("unterminated comment");
        pos = end + 3;
        continue;
      }
      if (text.startsWith("</", pos)) {
        pos += 2;
        const closing = readName();
        if (closing !== tag) fail(`mismatched </${closing}>, expected </${tag}>`);
        while (pos < text.length && /\s/.test(text[pos])) pos++;
        if (text[pos] !== ">") fail("malformed closing tag");
        pos++;
        return { tag, attrs, children };
      }
      children.push(readElement());
    }
  };

  skipMisc();
  const root = readElement();
  skipMisc();
  if (pos !== text.length) fail("trailing content after the root element");
  return root;
}

export function findChildren(node: XmlNode, tag: string): XmlNode[] {
  return node.children.filter((c) => c.tag === tag);
}

export function findChild(node: XmlNode, tag: string): XmlNode | undefined {
  return node.children.find((c) => c.tag === tag);
}

/**
 * Float formatting matching the service's serializer: shortest
 * round-trip decimal, trailing ".0" on integral values, scientific
 * notation with a two-digit exponent outside [1e-4, 1e16).
 */
export function formatNumber(value: number): string {
  if (Object.is(value, -0)) return "-0.0";
  const abs = Math.abs(value);
  if (value !== 0 && (abs < 1e-4 || abs >= 1e16)) {
    return value
      .toExponential()
      .replace(/e([+-])(\d)$/, "e$10$2");
  }
  if (Number.isInteger(value)) return `${value}.0`;
  return String(value);
}

export interface WriteNode {
  tag: string;
  attrs: Array<[string, string]>; // ordered
  children?: WriteNode[];
}

/** Serialize with the same layout the service uses: two-space indent,
 * one element per line, attributes in the given order. */
export function writeXml(node: WriteNode, depth = 0): string {
  const pad = "  ".repeat(depth);
  const attrs = node.attrs
    .map(([name, value]) => ` ${name}="${escapeAttr(value)}"`)
    .join("");
  if (!node.children || node.children.length === 0) {
    return `${pad}<${node.tag}${attrs}/>\n`;
  }
  const inner = node.children.map((c) => writeXml(c, depth + 1)).join("");
  return `${pad}<${node.tag}${attrs}>\n${inner}${pad}</${node.tag}>\n`;
}
