"""Recursive-descent parser producing type/method/statement trees from Java source.

The grammar covers declarations and the full statement syntax (Java 8-17
subset, see README); expressions are kept as normalized token runs, which is
all the mapping engine needs. Anonymous and local classes stay opaque inside
their enclosing leaf statement.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from .errors import ParseError
from .javalex import Token, tokenize

COMPOSITE_KINDS = frozenset(
    ["if", "for", "enhanced-for", "while", "do-while", "try", "catch", "finally",
     "switch", "synchronized", "block"]
)

_PRIMITIVES = frozenset(["int", "long", "short", "byte", "char", "boolean", "float", "double", "void", "var"])
_MODIFIERS = frozenset(
    ["public", "protected", "private", "static", "final", "abstract", "native",
     "synchronized", "transient", "volatile", "strictfp", "default", "sealed", "non-sealed"]
)


def hash64(text: str) -> str:
    return hashlib.blake2b(text.encode("utf-8"), digest_size=8).hexdigest()


@dataclass(eq=False)
class StatementNode:
    """One statement; composites hold nested statements as ordered children."""

    kind: str  # COMPOSITE_KINDS | "leaf"
    expressions: list[str] = field(default_factory=list)
    children: list["StatementNode"] = field(default_factory=list)
    index_in_parent: int = 0
    start_line: int = 0
    end_line: int = 0
    text: str = ""  # normalized tokens of the whole subtree
    parent: "StatementNode | None" = None
    branch_split: int = -1  # if-nodes: first else-branch child index
    body_child_count: int = -1  # try-nodes: children before catch/finally clauses

    @property
    def text_hash(self) -> str:
        return hash64(self.text)

    @property
    def body_children(self) -> list["StatementNode"]:
        if self.kind == "try" and self.body_child_count >= 0:
            return self.children[: self.body_child_count]
        return self.children

    @property
    def body_text(self) -> str:
        if self.kind == "leaf":
            return self.text  # a leaf is its own body (e.g. a tracked pipeline)
        return " ".join(c.text for c in self.body_children)

    @property
    def body_hash(self) -> str:
        return hash64(self.body_text)

    def walk(self):
        """Yield this node and all descendants, pre-order."""
        yield self
        for child in self.children:
            yield from child.walk()

    def descendants(self) -> list["StatementNode"]:
        return [n for c in self.children for n in c.walk()]

    def __repr__(self):
        return f"<{self.kind}@{self.start_line}>"


@dataclass(eq=False)
class MethodDeclarationInfo:
    """A method or constructor declaration with its parsed body."""

    name: str
    parameter_types: tuple[str, ...]
    return_type: str | None  # None for constructors
    start_line: int
    end_line: int
    statements: list[StatementNode] = field(default_factory=list)
    has_body: bool = True
    container: "TypeDeclarationInfo | None" = None

    @property
    def signature(self) -> tuple:
        return (self.name, self.parameter_types, self.return_type)

    @property
    def signature_text(self) -> str:
        ret = f":{self.return_type}" if self.return_type is not None else ""
        return f"{self.name}({','.join(self.parameter_types)}){ret}"

    @property
    def normalized_body(self) -> str:
        return " ".join(s.text for s in self.statements)

    @property
    def body_hash(self) -> str:
        return hash64(self.normalized_body)

    def all_nodes(self) -> list[StatementNode]:
        return [n for s in self.statements for n in s.walk()]

    def __repr__(self):
        return f"<method {self.signature_text}>"


@dataclass(eq=False)
class TypeDeclarationInfo:
    """A class/interface/enum/record declaration."""

    name: str
    kind: str  # class | interface | enum | record | annotation
    package: str
    nesting_chain: tuple[str, ...] = ()
    source_folder: str = ""
    path: str = ""
    extends_types: tuple[str, ...] = ()
    implements_types: tuple[str, ...] = ()
    methods: list[MethodDeclarationInfo] = field(default_factory=list)
    nested: list["TypeDeclarationInfo"] = field(default_factory=list)
    start_line: int = 0
    end_line: int = 0

    @property
    def qualified_chain(self) -> tuple[str, ...]:
        return (*self.nesting_chain, self.name)

    @property
    def qualified_name(self) -> str:
        chain = ".".join(self.qualified_chain)
        return f"{self.package}.{chain}" if self.package else chain

    def all_types(self):
        yield self
        for t in self.nested:
            yield from t.all_types()

    def __repr__(self):
        return f"<type {self.qualified_name}>"


def parse_java(text: str, path: str | None = None) -> tuple[str, list[TypeDeclarationInfo]]:
    """Parse a compilation unit; returns (package name, top-level types)."""
    tokens = tokenize(text, path)
    parser = _Parser(tokens, path)
    return parser.compilation_unit()


class _Parser:
    def __init__(self, tokens: list[Token], path: str | None):
        self.toks = tokens
        self.i = 0
        self.path = path

    # -- token helpers -------------------------------------------------------

    def _err(self, msg: str) -> ParseError:
        if self.i < len(self.toks):
            t = self.toks[self.i]
            return ParseError(msg, t.line, t.col, self.path)
        last = self.toks[-1] if self.toks else None
        return ParseError(msg, last.line if last else 0, 0, self.path)

    def peek(self, offset: int = 0) -> Token | None:
        j = self.i + offset
        return self.toks[j] if j < len(self.toks) else None

    def at(self, text: str, offset: int = 0) -> bool:
        t = self.peek(offset)
        return t is not None and t.text == text

    def next(self) -> Token:
        if self.i >= len(self.toks):
            raise self._err("unexpected end of input")
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        t = self.next()
        if t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text!r}", t.line, t.col, self.path)
        return t

    def _skip_balanced(self, open_text: str, close_text: str) -> int:
        """Consume from the opening delimiter through its match; returns end index."""
        self.expect(open_text)
        depth = 1
        while depth > 0:
            t = self.next()
            if t.text == open_text:
                depth += 1
            elif t.text == close_text:
                depth -= 1
        return self.i - 1

    def _skip_generics(self):
        """Consume a balanced <...> run; >> and >>> close several levels."""
        self.expect("<")
        depth = 1
        while depth > 0:
            t = self.next()
            if t.text == "<":
                depth += 1
            elif t.text == ">":
                depth -= 1
            elif t.text == ">>":
                depth -= 2
            elif t.text == ">>>":
                depth -= 3

    def _skip_annotations_and_modifiers(self):
        while True:
            t = self.peek()
            if t is None:
                return
            if t.text == "@" and self.peek(1) is not None and self.peek(1).text != "interface":
                self.next()
                self.next()  # annotation name head
                while self.at("."):
                    self.next()
                    self.next()
                if self.at("("):
                    self._skip_balanced("(", ")")
                continue
            if t.kind == "keyword" and t.text in _MODIFIERS:
                self.next()
                continue
            return

    # -- declarations --------------------------------------------------------

    def compilation_unit(self) -> tuple[str, list[TypeDeclarationInfo]]:
        package = ""
        types: list[TypeDeclarationInfo] = []
        while self.peek() is not None:
            self._skip_annotations_and_modifiers()
            t = self.peek()
            if t is None:
                break
            if t.text == "package":
                self.next()
                parts = [self.next().text]
                while self.at("."):
                    self.next()
                    parts.append(self.next().text)
                self.expect(";")
                package = ".".join(parts)
            elif t.text == "import":
                while not self.at(";"):
                    self.next()
                self.next()
            elif t.text == ";":
                self.next()
            elif t.text in ("class", "interface", "enum", "record") or t.text == "@":
                types.append(self.type_declaration(package, ()))
            else:
                raise self._err(f"unexpected token {t.text!r} at top level")
        return package, types

    def type_declaration(self, package: str, nesting: tuple[str, ...]) -> TypeDeclarationInfo:
        start = self.peek()
        kind_tok = self.next()
        kind = kind_tok.text
        if kind == "@":
            self.expect("interface")
            kind = "annotation"
        name = self.next().text
        if self.at("<"):
            self._skip_generics()
        extends: list[str] = []
        implements: list[str] = []
        if kind == "record" and self.at("("):
            self._skip_balanced("(", ")")
        while not self.at("{"):
            t = self.next()
            if t.text == "extends":
                extends.append(self._read_type_ref())
                while self.at(","):
                    self.next()
                    extends.append(self._read_type_ref())
            elif t.text == "implements":
                implements.append(self._read_type_ref())
                while self.at(","):
                    self.next()
                    implements.append(self._read_type_ref())
            # permits / annotations on supertypes: skip

        decl = TypeDeclarationInfo(
            name=name,
            kind=kind,
            package=package,
            nesting_chain=nesting,
            extends_types=tuple(extends),
            implements_types=tuple(implements),
            start_line=start.line,
        )
        self.expect("{")
        if kind == "enum":
            self._skip_enum_constants()
        while not self.at("}"):
            self._member(decl)
        end = self.expect("}")
        decl.end_line = end.line
        return decl

    def _skip_enum_constants(self):
        # Constants run until ';' or the closing '}', possibly with bodies.
        while True:
            if self.at(";"):
                self.next()
                return
            if self.at("}"):
                return
            self.next()  # constant name (or annotation noise)
            if self.at("("):
                self._skip_balanced("(", ")")
            if self.at("{"):
                self._skip_balanced("{", "}")
            if self.at(","):
                self.next()

    def _member(self, decl: TypeDeclarationInfo):
        start_tok = self.peek()
        self._skip_annotations_and_modifiers()
        t = self.peek()
        if t is None:
            raise self._err("unexpected end of class body")
        if t.text == ";":
            self.next()
            return
        if t.text in ("class", "interface", "enum", "record") or (
            t.text == "@" and self.peek(1) is not None and self.peek(1).text == "interface"
        ):
            nested = self.type_declaration(decl.package, decl.qualified_chain)
            decl.nested.append(nested)
            return
        if t.text == "{":  # instance/static initializer
            self._skip_balanced("{", "}")
            return
        if t.text == "<":  # generic method
            self._skip_generics()
            self._skip_annotations_and_modifiers()

        # Constructor: container name directly followed by '('.
        if self.at(decl.name) and self.at("(", 1):
            name = self.next().text
            self._method_tail(decl, name, return_type=None, start_line=start_tok.line)
            return

        ret = self._read_type_ref()
        if self.peek() is None:
            raise self._err("unexpected end after type reference")
        if self.at("("):  # compact record constructor or broken input: treat name-less as ctor
            self._method_tail(decl, ret, return_type=None, start_line=start_tok.line)
            return
        name = self.next().text
        if self.at("("):
            self._method_tail(decl, name, return_type=ret, start_line=start_tok.line)
        else:
            # Field declaration: consume to ';' (initializers may hold braces).
            depth = 0
            while True:
                tok = self.next()
                if tok.text in "([{":
                    depth += 1
                elif tok.text in ")]}":
                    depth -= 1
                elif tok.text == ";" and depth == 0:
                    return

    def _method_tail(self, decl: TypeDeclarationInfo, name: str, return_type: str | None, start_line: int):
        params = self._parameter_types()
        while self.at("[") :  # legacy array suffix on methods: int foo()[]
            self.next()
            self.expect("]")
            return_type = (return_type or "") + "[]"
        if self.at("throws"):
            self.next()
            self._read_type_ref()
            while self.at(","):
                self.next()
                self._read_type_ref()
        method = MethodDeclarationInfo(
            name=name,
            parameter_types=tuple(params),
            return_type=return_type,
            start_line=start_line,
            end_line=start_line,
            container=decl,
        )
        if self.at(";"):
            self.next()
            method.has_body = False
        elif self.at("default"):  # annotation element default
            while not self.at(";"):
                self.next()
            self.next()
            method.has_body = False
        else:
            self.expect("{")
            method.statements = self._statement_list("}")
            end = self.expect("}")
            method.end_line = end.line
        decl.methods.append(method)

    def _parameter_types(self) -> list[str]:
        self.expect("(")
        params: list[str] = []
        while not self.at(")"):
            self._skip_annotations_and_modifiers()
            if self.at(")"):
                break
            ptype = self._read_type_ref()
            if self.at("..."):
                self.next()
                ptype += "..."
            if self.peek() is not None and self.peek().kind in ("ident", "keyword") and not self.at(","):
                self.next()  # parameter name (or 'this' receiver)
            while self.at("["):  # legacy array suffix on the name
                self.next()
                self.expect("]")
                ptype += "[]"
            params.append(ptype)
            if self.at(","):
                self.next()
        self.expect(")")
        return params

    def _read_type_ref(self) -> str:
        """A (possibly dotted, generic, array) type reference as compact text."""
        parts: list[str] = []
        t = self.next()
        if t.kind not in ("ident", "keyword"):
            raise ParseError(f"expected type, found {t.text!r}", t.line, t.col, self.path)
        parts.append(t.text)
        while True:
            if self.at("<"):
                start = self.i
                self._skip_generics()
                parts.append(_compact(self.toks[start : self.i]))
            elif self.at(".") and self.peek(1) is not None and self.peek(1).kind in ("ident", "keyword"):
                self.next()
                parts.append("." + self.next().text)
            elif self.at("["):
                self.next()
                self.expect("]")
                parts.append("[]")
            else:
                break
        return "".join(parts)

    # -- statements ----------------------------------------------------------

    def _statement_list(self, terminator: str) -> list[StatementNode]:
        stmts: list[StatementNode] = []
        while not self.at(terminator):
            node = self.statement()
            if node is not None:
                node.index_in_parent = len(stmts)
                stmts.append(node)
        return stmts

    def statement(self) -> StatementNode | None:
        t = self.peek()
        if t is None:
            raise self._err("unexpected end of statement list")
        text = t.text
        if text == "if":
            return self._if_statement()
        if text == "while":
            return self._while_statement()
        if text == "do":
            return self._do_statement()
        if text == "for":
            return self._for_statement()
        if text == "try":
            return self._try_statement()
        if text == "switch":
            return self._switch_statement()
        if text == "synchronized" and self.at("(", 1):
            return self._synchronized_statement()
        if text == "{":
            return self._block_statement()
        if text in ("class", "interface", "enum", "abstract", "final", "static", "record") and self._looks_like_local_class():
            return self._local_class_leaf()
        if t.kind == "ident" and self.at(":", 1):
            # labeled statement: keep the label, parse the underlying statement
            label = self.next()
            self.expect(":")
            inner = self.statement()
            if inner is not None:
                inner.text = f"{label.text} : {inner.text}"
                inner.start_line = label.line
            return inner
        return self._leaf_statement()

    def _looks_like_local_class(self) -> bool:
        j = self.i
        while j < len(self.toks) and self.toks[j].text in _MODIFIERS:
            j += 1
        return j < len(self.toks) and self.toks[j].text in ("class", "interface", "enum", "record")

    def _local_class_leaf(self) -> StatementNode:
        start = self.peek()
        begin = self.i
        while not self.at("{"):
            self.next()
        self._skip_balanced("{", "}")
        end_tok = self.toks[self.i - 1]
        return StatementNode(
            kind="leaf",
            text=_norm(self.toks[begin : self.i]),
            start_line=start.line,
            end_line=end_tok.line,
        )

    def _leaf_statement(self) -> StatementNode:
        start = self.peek()
        begin = self.i
        depth = 0
        while True:
            tok = self.next()
            if tok.text in "([{":
                depth += 1
            elif tok.text in ")]}":
                depth -= 1
            elif tok.text == ";" and depth == 0:
                break
        node = StatementNode(
            kind="leaf",
            text=_norm(self.toks[begin : self.i]),
            start_line=start.line,
            end_line=self.toks[self.i - 1].line,
        )
        return node

    def _paren_run(self) -> list[Token]:
        """Tokens inside a balanced parenthesis group (delimiters excluded)."""
        self.expect("(")
        begin = self.i
        depth = 1
        while depth > 0:
            t = self.next()
            if t.text == "(":
                depth += 1
            elif t.text == ")":
                depth -= 1
        return self.toks[begin : self.i - 1]

    def _branch_children(self) -> list[StatementNode]:
        """One statement or an unwrapped block, as a child list."""
        if self.at("{"):
            self.expect("{")
            stmts = self._statement_list("}")
            self.expect("}")
            return stmts
        node = self.statement()
        return [node] if node is not None else []

    def _finish(self, node: StatementNode, header: str, end_line: int) -> StatementNode:
        for idx, c in enumerate(node.children):
            c.index_in_parent = idx
            c.parent = node
        node.end_line = end_line
        body = " ".join(c.text for c in node.children)
        node.text = f"{header} {body}".strip()
        return node

    def _last_line(self) -> int:
        return self.toks[self.i - 1].line

    def _if_statement(self) -> StatementNode:
        start = self.expect("if")
        cond = _norm(self._paren_run())
        node = StatementNode(kind="if", expressions=[cond], start_line=start.line)
        then_children = self._branch_children()
        else_children: list[StatementNode] = []
        if self.at("else"):
            self.next()
            if self.at("if"):
                else_children = [self._if_statement()]
            else:
                else_children = self._branch_children()
        node.children = then_children + else_children
        node.branch_split = len(then_children)
        return self._finish(node, f"if ( {cond} )", self._last_line())

    def _while_statement(self) -> StatementNode:
        start = self.expect("while")
        cond = _norm(self._paren_run())
        node = StatementNode(kind="while", expressions=[cond], start_line=start.line)
        node.children = self._branch_children()
        return self._finish(node, f"while ( {cond} )", self._last_line())

    def _do_statement(self) -> StatementNode:
        start = self.expect("do")
        node = StatementNode(kind="do-while", start_line=start.line)
        node.children = self._branch_children()
        self.expect("while")
        cond = _norm(self._paren_run())
        self.expect(";")
        node.expressions = [cond]
        return self._finish(node, f"do-while ( {cond} )", self._last_line())

    def _for_statement(self) -> StatementNode:
        start = self.expect("for")
        run = self._paren_run()
        segments = _split_top_level(run, ";")
        if len(segments) > 1:  # classic for
            exprs = [_norm(seg) for seg in segments]
            node = StatementNode(kind="for", expressions=exprs, start_line=start.line)
            header = f"for ( {' ; '.join(exprs)} )"
        else:
            param, iterable = _split_enhanced_for(run)
            node = StatementNode(
                kind="enhanced-for", expressions=[_norm(param), _norm(iterable)], start_line=start.line
            )
            header = f"for ( {_norm(param)} : {_norm(iterable)} )"
        node.children = self._branch_children()
        return self._finish(node, header, self._last_line())

    def _try_statement(self) -> StatementNode:
        start = self.expect("try")
        resources: list[str] = []
        if self.at("("):
            run = self._paren_run()
            resources = [_norm(seg) for seg in _split_top_level(run, ";") if seg]
        node = StatementNode(kind="try", expressions=resources, start_line=start.line)
        self.expect("{")
        body = self._statement_list("}")
        self.expect("}")
        clauses: list[StatementNode] = []
        while self.at("catch"):
            ctok = self.expect("catch")
            param = _norm(self._paren_run())
            catch = StatementNode(kind="catch", expressions=[param], start_line=ctok.line)
            self.expect("{")
            catch.children = self._statement_list("}")
            self.expect("}")
            self._finish(catch, f"catch ( {param} )", self._last_line())
            clauses.append(catch)
        if self.at("finally"):
            ftok = self.next()
            fin = StatementNode(kind="finally", start_line=ftok.line)
            self.expect("{")
            fin.children = self._statement_list("}")
            self.expect("}")
            self._finish(fin, "finally", self._last_line())
            clauses.append(fin)
        node.children = body + clauses
        node.body_child_count = len(body)
        res = f"( {' ; '.join(resources)} ) " if resources else ""
        return self._finish(node, f"try {res}".strip(), self._last_line())

    def _switch_statement(self) -> StatementNode:
        start = self.expect("switch")
        selector = _norm(self._paren_run())
        node = StatementNode(kind="switch", expressions=[selector], start_line=start.line)
        self.expect("{")
        children: list[StatementNode] = []
        while not self.at("}"):
            t = self.peek()
            if t.text in ("case", "default"):
                children.append(self._switch_label())
            else:
                stmt = self.statement()
                if stmt is not None:
                    children.append(stmt)
        self.expect("}")
        node.children = children
        return self._finish(node, f"switch ( {selector} )", self._last_line())

    def _switch_label(self) -> StatementNode:
        start = self.peek()
        begin = self.i
        depth = 0
        while True:
            t = self.next()
            if t.text in "([":
                depth += 1
            elif t.text in ")]":
                depth -= 1
            elif depth == 0 and t.text in (":", "->"):
                break
        return StatementNode(
            kind="leaf",
            text=_norm(self.toks[begin : self.i]),
            start_line=start.line,
            end_line=self.toks[self.i - 1].line,
        )

    def _synchronized_statement(self) -> StatementNode:
        start = self.expect("synchronized")
        monitor = _norm(self._paren_run())
        node = StatementNode(kind="synchronized", expressions=[monitor], start_line=start.line)
        self.expect("{")
        node.children = self._statement_list("}")
        self.expect("}")
        return self._finish(node, f"synchronized ( {monitor} )", self._last_line())

    def _block_statement(self) -> StatementNode:
        start = self.expect("{")
        node = StatementNode(kind="block", start_line=start.line)
        node.children = self._statement_list("}")
        self.expect("}")
        return self._finish(node, "{ }", self._last_line())


def _norm(tokens: list[Token]) -> str:
    return " ".join(t.text for t in tokens)


def _compact(tokens: list[Token]) -> str:
    return "".join(t.text for t in tokens)


def _split_top_level(tokens: list[Token], sep: str) -> list[list[Token]]:
    out: list[list[Token]] = [[]]
    depth = 0
    for t in tokens:
        if t.text in "([{":
            depth += 1
        elif t.text in ")]}":
            depth -= 1
        if t.text == sep and depth == 0:
            out.append([])
        else:
            out[-1].append(t)
    return out


def _split_enhanced_for(tokens: list[Token]) -> tuple[list[Token], list[Token]]:
    """Split `Type name : iterable`, ignoring ternary colons in the iterable."""
    depth = 0
    pending_q = 0
    for idx, t in enumerate(tokens):
        if t.text in "([{":
            depth += 1
        elif t.text in ")]}":
            depth -= 1
        elif depth == 0 and t.text == "?":
            pending_q += 1
        elif depth == 0 and t.text == ":":
            if pending_q:
                pending_q -= 1
            else:
                return tokens[:idx], tokens[idx + 1 :]
    raise ParseError("malformed enhanced-for header", tokens[0].line if tokens else 0, 0, None)
