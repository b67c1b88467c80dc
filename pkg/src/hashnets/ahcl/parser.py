"""Recursive-descent parser for configuration files.

Grammar (documented in docs/ahcl.md):

    component   := "component" IDENT "{" item* "}"
    item        := unit | connect | collective
    unit        := "unit" IDENT ["repetitive"] "{" section* "}"
    section     := "ports" "{" portdecl* "}"
                 | "sem" IDENT ("," IDENT)* ";"
                 | "protocol" "{" blist "}"
    portdecl    := ("in"|"out") (groupdecl | portspec ("," portspec)*) ";"
    groupdecl   := "group" IDENT ("any"|"all") ["stream" "(" INT ")"]
                   "{" IDENT ("," IDENT)* "}"
    portspec    := IDENT ["stream" "(" INT ")"]
    behavior    := "skip" | "seq" "{" blist "}" | "par" "{" blist "}"
                 | "alt" "{" blist "}"
                 | "repeat" [INT] behavior ["until" predicate]
                 | "if" predicate "{" blist "}" ["else" "{" blist "}"]
                 | "do" IDENT | "signal" IDENT | "wait" IDENT
                 | IDENT ("!" | "?") | "(" behavior ")"
    blist       := [behavior (";" behavior)* [";"]]
    predicate   := conj (("or"|"|") conj)*
    conj        := "<" IDENT ("&" IDENT)* ">" | IDENT ("&" IDENT)*
    connect     := "connect" portref "->" portref [mode] ["as" IDENT] ";"
    portref     := IDENT ["." IDENT]
    mode        := "synchronous" | "ready" | "buffered" ["(" INT ")"]
    collective  := "collective" IDENT ["stream" "(" INT ")"]
                   "{" IDENT "." IDENT ("," IDENT "." IDENT)* "}"

Channels without `as` are named ch0, ch1, ... in declaration order.
A `repeat` with a count takes no `until`; one with neither repeats forever.
Identifier uniqueness that the translator depends on (unit ids; the global
port/group/collective namespace; per-unit semaphores) is enforced here via
DuplicateIdentifier; everything else is the validator's job.
"""

from __future__ import annotations

from hashnets.ahcl.ast import (
    Channel,
    Collective,
    Component,
    Group,
    Mode,
    Port,
    PortRef,
    Unit,
    buffered,
)
from hashnets.ahcl.lexer import Token, tokenize
from hashnets.ahcl.preprocess import expand_iterators
from hashnets.behavior import (
    Activate,
    Alt,
    Conjunction,
    Do,
    If,
    Par,
    RepeatCounter,
    RepeatForever,
    RepeatUntil,
    Seq,
    Signal,
    Skip,
    StreamPredicate,
    Wait,
)
from hashnets.diagnostics import AhclSyntaxError, DuplicateIdentifier, Span


class _Parser:
    def __init__(self, tokens: list, file: str):
        self.tokens = tokens
        self.pos = 0
        self.file = file
        self.port_ids: dict = {}  # global namespace: ports, groups, collectives
        self.unit_ids: dict = {}
        self.channel_ids: dict = {}
        self._auto_chan = 0

    # -- token plumbing

    def peek(self, ahead: int = 0) -> Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def at(self, *kinds: str) -> bool:
        return self.peek().kind in kinds

    def take(self) -> Token:
        tok = self.peek()
        self.pos += 1
        return tok

    def accept(self, *kinds: str) -> Token | None:
        if self.at(*kinds):
            return self.take()
        return None

    def expect(self, *kinds: str) -> Token:
        if self.at(*kinds):
            return self.take()
        tok = self.peek()
        got = tok.text or "end of input"
        raise AhclSyntaxError(
            f"expected {' or '.join(kinds)}, found {got!r}",
            tok.span,
            expected=kinds,
            file=self.file,
        )

    def claim(self, namespace: dict, tok: Token) -> str:
        if tok.text in namespace:
            raise DuplicateIdentifier(tok.text, tok.span, self.file)
        namespace[tok.text] = tok.span
        return tok.text

    # -- grammar

    def component(self) -> Component:
        self.expect("component")
        name_tok = self.expect("IDENT")
        open_tok = self.expect("LBRACE")
        units = []
        channels = []
        collectives = []
        while not self.at("RBRACE"):
            if self.at("unit"):
                units.append(self.unit())
            elif self.at("connect"):
                channels.append(self.connect())
            elif self.at("collective"):
                collectives.append(self.collective())
            else:
                tok = self.peek()
                raise AhclSyntaxError(
                    f"expected unit, connect, or collective, found {tok.text or 'end of input'!r}",
                    tok.span,
                    expected=("unit", "connect", "collective"),
                    file=self.file,
                )
        self.expect("RBRACE")
        self.expect("EOF")
        return Component(
            name_tok.text,
            tuple(units),
            tuple(channels),
            tuple(collectives),
            span=open_tok.span,
        )

    def unit(self) -> Unit:
        kw = self.expect("unit")
        name = self.claim(self.unit_ids, self.expect("IDENT"))
        repetitive = self.accept("repetitive") is not None
        self.expect("LBRACE")
        ports: list = []
        sems: list = []
        sem_ids: dict = {}
        protocol = None
        while not self.at("RBRACE"):
            if self.at("ports"):
                self.take()
                self.expect("LBRACE")
                while not self.at("RBRACE"):
                    ports.extend(self.port_decl())
                self.expect("RBRACE")
            elif self.at("sem"):
                self.take()
                sems.append(self.claim(sem_ids, self.expect("IDENT")))
                while self.accept("COMMA"):
                    sems.append(self.claim(sem_ids, self.expect("IDENT")))
                self.expect("SEMI")
            elif self.at("protocol"):
                tok = self.take()
                if protocol is not None:
                    raise AhclSyntaxError(
                        "unit already has a protocol", tok.span, file=self.file
                    )
                self.expect("LBRACE")
                protocol = self.blist()
                self.expect("RBRACE")
            else:
                tok = self.peek()
                raise AhclSyntaxError(
                    f"expected ports, sem, or protocol, found {tok.text or 'end of input'!r}",
                    tok.span,
                    expected=("ports", "sem", "protocol"),
                    file=self.file,
                )
        self.expect("RBRACE")
        if protocol is None:
            raise AhclSyntaxError(f"unit '{name}' has no protocol", kw.span, file=self.file)
        return Unit(name, repetitive, tuple(ports), tuple(sems), protocol, span=kw.span)

    def _stream_suffix(self) -> tuple:
        if self.accept("stream"):
            self.expect("LPAREN")
            n = int(self.expect("INT").text)
            self.expect("RPAREN")
            return True, n
        return False, 0

    def port_decl(self) -> list:
        dir_tok = self.expect("in", "out")
        direction = dir_tok.kind
        if self.at("group"):
            self.take()
            gid_tok = self.expect("IDENT")
            gid = self.claim(self.port_ids, gid_tok)
            kind = self.expect("any", "all").kind
            stream, nesting = self._stream_suffix()
            self.expect("LBRACE")
            members = []
            while True:
                m_tok = self.expect("IDENT")
                mid = self.claim(self.port_ids, m_tok)
                members.append(Port(mid, direction, stream, nesting, span=m_tok.span))
                if not self.accept("COMMA"):
                    break
            self.expect("RBRACE")
            self.expect("SEMI")
            return [
                Port(
                    gid,
                    direction,
                    stream,
                    nesting,
                    group=Group(kind, tuple(members)),
                    span=gid_tok.span,
                )
            ]
        out = []
        while True:
            p_tok = self.expect("IDENT")
            pid = self.claim(self.port_ids, p_tok)
            stream, nesting = self._stream_suffix()
            out.append(Port(pid, direction, stream, nesting, span=p_tok.span))
            if not self.accept("COMMA"):
                break
        self.expect("SEMI")
        return out

    # -- behavior

    def blist(self):
        items = []
        while not self.at("RBRACE"):
            items.append(self.behavior())
            if not self.accept("SEMI"):
                break
        if len(items) == 1:
            return items[0]
        return Seq(tuple(items))

    def behavior(self):
        if self.accept("LPAREN"):  # grouping only, no node of its own
            inner = self.behavior()
            self.expect("RPAREN")
            return inner
        if self.accept("skip"):
            return Skip()
        if self.at("seq", "par", "alt"):
            kw = self.take().kind
            self.expect("LBRACE")
            items = []
            while not self.at("RBRACE"):
                items.append(self.behavior())
                if not self.accept("SEMI"):
                    break
            self.expect("RBRACE")
            ctor = {"seq": Seq, "par": Par, "alt": Alt}[kw]
            return ctor(tuple(items))
        if self.at("repeat"):
            kw = self.take()
            count_tok = self.accept("INT")
            body = self.behavior()
            if self.accept("until"):
                if count_tok is not None:
                    raise AhclSyntaxError(
                        "counted repetition takes no until clause", kw.span, file=self.file
                    )
                return RepeatUntil(body, self.predicate())
            if count_tok is not None:
                return RepeatCounter(body, int(count_tok.text))
            return RepeatForever(body)
        if self.accept("if"):
            pred = self.predicate()
            self.expect("LBRACE")
            then = self.blist()
            self.expect("RBRACE")
            orelse = Skip()
            if self.accept("else"):
                self.expect("LBRACE")
                orelse = self.blist()
                self.expect("RBRACE")
            return If(pred, then, orelse)
        if self.accept("do"):
            return Do(self.expect("IDENT").text)
        if self.accept("signal"):
            return Signal(self.expect("IDENT").text)
        if self.accept("wait"):
            return Wait(self.expect("IDENT").text)
        ident = self.expect("IDENT")
        pol = self.expect("BANG", "QUERY")
        return Activate(ident.text, "!" if pol.kind == "BANG" else "?")

    def predicate(self) -> StreamPredicate:
        disjuncts = [self.conjunction()]
        while self.accept("or", "PIPE"):
            disjuncts.append(self.conjunction())
        return StreamPredicate(tuple(disjuncts))

    def conjunction(self) -> Conjunction:
        bracketed = self.accept("LANGLE") is not None
        ports = [self.expect("IDENT").text]
        while self.accept("AMP"):
            ports.append(self.expect("IDENT").text)
        if bracketed:
            self.expect("RANGLE")
        return Conjunction(tuple(ports), bracketed)

    # -- channels and collectives

    def portref(self) -> PortRef:
        first = self.expect("IDENT")
        if self.accept("DOT"):
            second = self.expect("IDENT")
            return PortRef(first.text, second.text, span=first.span)
        return PortRef(None, first.text, span=first.span)

    def connect(self) -> Channel:
        kw = self.expect("connect")
        sender = self.portref()
        self.expect("ARROW")
        receiver = self.portref()
        mode = Mode("synchronous")
        if self.accept("synchronous"):
            pass
        elif self.accept("ready"):
            mode = Mode("ready")
        elif self.accept("buffered"):
            size = None
            if self.accept("LPAREN"):
                size = int(self.expect("INT").text)
                self.expect("RPAREN")
            mode = buffered(size)
        if self.accept("as"):
            name_tok = self.expect("IDENT")
            cid = self.claim(self.channel_ids, name_tok)
        else:
            while f"ch{self._auto_chan}" in self.channel_ids:
                self._auto_chan += 1
            cid = f"ch{self._auto_chan}"
            self.channel_ids[cid] = kw.span
        self.expect("SEMI")
        return Channel(cid, sender, receiver, mode, span=kw.span)

    def collective(self) -> Collective:
        kw = self.expect("collective")
        cid = self.claim(self.port_ids, self.expect("IDENT"))
        stream, nesting = self._stream_suffix()
        self.expect("LBRACE")
        members = []
        while True:
            u_tok = self.expect("IDENT")
            self.expect("DOT")
            p_tok = self.expect("IDENT")
            self.claim(self.port_ids, p_tok)
            members.append((u_tok.text, p_tok.text))
            if not self.accept("COMMA"):
                break
        self.expect("RBRACE")
        return Collective(cid, tuple(members), stream, nesting, span=kw.span)


def parse_configuration(text: str, file: str | None = None, *, preprocess: bool = True) -> Component:
    """Parse source text into a Component; raises positioned errors."""
    fname = file or "<input>"
    if preprocess:
        text = expand_iterators(text)
    tokens = tokenize(text, fname)
    return _Parser(tokens, fname).component()
