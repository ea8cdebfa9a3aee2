"""Deterministic synthetic fixture corpus: fault-handling manuals, operating
regulations, and safety-ordinance chapters for high-speed trainsets.

Everything here is generated from literal tables, with no randomness, so
indexes, forged datasets, and evaluation runs built on it are byte-stable
across runs and platforms.  The same tables also provide scripted backend
rules (per-document question lists, exam-item conversions, a generic
draft), an evaluation set whose references quote the corpus verbatim, and
UI scenario presets.

``python -m railadvisor.fixture_corpus <dest>`` materializes the corpus
plus manifest, exam bank, eval set, scenario presets, and ready-to-run
service configs under ``<dest>``.
"""

from __future__ import annotations

import json
import re
import sys
from dataclasses import dataclass
from pathlib import Path

from .corpus import Category, Document, count_tokens
from .dataset_forge import QAPair
from .llm_gateway import BackendSpec, BackendKind, FallbackMode, ScriptRule

# Must match the distinctive instruction lines in the packaged templates:
# scripted rules key on these to tell pipeline stages apart.
DRAFT_PROMPT_MARKER = "Answer the driver's question from your own knowledge"
QUESTION_PROMPT_MARKER = "write up to"
EXAM_PROMPT_MARKER = "Rewrite the examination item"

GENERIC_DRAFT = (
    "请保持冷静，按照随车资料的一般流程处置：确认司机室界面显示，"
    "必要时联系随车机械师，并向调度汇报运行状态。"
)


@dataclass(frozen=True)
class FixtureDoc:
    path: str
    category: Category
    text: str
    rule_keys: tuple[str, ...]          # substrings present in every chunk
    gen_questions: tuple[str, ...]      # scripted question-generation output
    eval_question: str | None = None
    eval_reference: str | None = None


# --- expertise manuals -------------------------------------------------------

_MANUALS = (
    # (file slug, trainset display, rule trainset key, system, phenomenon,
    #  codes, persist action, avoid action, check target)
    (
        "CR400AF_Series_Trainset_In-Transit_Emergency_Fault_Handling_Manual",
        "CR400AF", "CR400AF", "牵引系统", "牵引丢失",
        ("3454", "3457"),
        "利用剩余动力维持运行至前方车站",
        "高速通过分相区", "牵引变流器与高压设备状态",
    ),
    (
        "CRH3C_CRH380BL_Series_Trainsets_In-Transit_Emergency_Fault_Handling_Manual",
        "CRH3C、CRH380B(L)", "CRH3C", "牵引系统", "牵引丢失",
        ("20B5", "21B0", "2253"),
        "在HMI上切除故障车的牵引变流器",
        "反复施加最大牵引级位", "牵引电机与齿轮箱温度",
    ),
    (
        "CR400AF_Speed_Sensor_Fault_Handling_Manual",
        "CR400AF", "CR400AF", "速度传感器", "速度传感器故障",
        ("5502",),
        "切除故障轴的速度传感器并限速运行",
        "依赖故障轴的速度显示", "速度传感器连接电缆",
    ),
    (
        "CRH380B_Axle_Temperature_Sensor_Fault_Handling_Manual",
        "CRH380B", "CRH380B", "轴温传感器", "轴温传感器报警",
        ("5608",),
        "在前方车站安排乘务人员下车检查轴箱温度",
        "忽略持续升高的轴温显示", "轴箱与轴温传感器安装状态",
    ),
    (
        "CR400BF_Brake_System_Fault_Handling_Manual",
        "CR400BF", "CR400BF", "制动系统", "制动不缓解",
        ("7B21",),
        "隔离故障车的制动控制单元并限速160运行",
        "长时间保持常用制动", "制动夹钳与风管压力",
    ),
    (
        "CR300AF_Pantograph_Fault_Handling_Manual",
        "CR300AF", "CR300AF", "受电弓", "受电弓降弓故障",
        ("4415",),
        "申请改用备用受电弓并转换供电方式",
        "在接触网异常区段强行升弓", "受电弓碳滑板与气路",
    ),
    (
        "CRH2A_Door_System_Fault_Handling_Manual",
        "CRH2A", "CRH2A", "车门系统", "车门无法关闭锁闭",
        ("6120",),
        "对故障车门执行隔离并安排乘务员看守",
        "在车门未锁闭时动车", "车门锁闭装置与隔离开关",
    ),
    (
        "CR400AF_HVAC_Fault_Handling_Manual",
        "CR400AF", "CR400AF", "空调系统", "空调机组停机",
        ("8830",),
        "切换至备用通风模式并调整旅客分布",
        "关闭全部通风单元", "空调机组断路器与滤网",
    ),
    (
        "CRH380BL_Battery_Fault_Handling_Manual",
        "CRH380BL", "CRH380BL", "蓄电池", "蓄电池电压过低",
        ("9012",),
        "减少非必要负载并申请就近停车检查",
        "长时间停放时保留全部负载", "蓄电池充电机输出",
    ),
    (
        "CR400BF_Fire_Alarm_Fault_Handling_Manual",
        "CR400BF", "CR400BF", "火灾报警", "火灾报警探头误报",
        ("1190",),
        "确认现场无烟火后按误报流程复位",
        "未经确认直接复位报警", "报警探头与所在客室环境",
    ),
    (
        "CRH3C_Air_Compressor_Fault_Handling_Manual",
        "CRH3C", "CRH3C", "空气压缩机", "空气压缩机不工作",
        ("7705",),
        "监控总风压力并申请限速至前方检修站",
        "频繁启停压缩机", "总风缸压力与干燥器状态",
    ),
    (
        "CR300BF_Bogie_Monitoring_Fault_Handling_Manual",
        "CR300BF", "CR300BF", "转向架", "转向架失稳报警",
        ("6644",),
        "立即限速并申请动车组回库检查",
        "继续保持原速运行", "转向架横向加速度记录",
    ),
)


def _manual_text(
    trainset: str,
    system: str,
    phenomenon: str,
    codes: tuple[str, ...],
    persist: str,
    avoid: str,
    check: str,
) -> str:
    codes_joined = "、".join(codes)
    return (
        f"{trainset}系列动车组{system}应急故障处理手册\n"
        f"\n"
        f"第一章 {system}故障（{codes_joined}）\n"
        f"故障现象：{trainset}动车组出现{phenomenon}，司机室HMI界面显示故障代码{codes_joined}。\n"
        f"适用范围：{trainset}全部编组。\n"
        f"处理步骤：\n"
        f"步骤1：司机发现{phenomenon}后，利用剩余动力保持运行，并立即通知随车机械师。\n"
        f"步骤2：随车机械师进入HMI当前故障界面，确认故障代码{codes[0]}，通知司机继续保持运行。\n"
        f"步骤3：若故障自动清除，恢复正常运行；若故障持续，{persist}。\n"
        f"\n"
        f"第二章 {system}故障运行注意事项\n"
        f"（一）{trainset}动车组在{system}故障期间应避免{avoid}。\n"
        f"（二）列车到达前方停车站后，随车机械师下车检查{check}，并向动车组调度汇报{system}状态。\n"
        f"（三）如{system}故障伴随其他报警，按故障优先级依次处置，必要时申请救援。\n"
    )


def _manual_doc(entry) -> FixtureDoc:
    slug, trainset, key, system, phenomenon, codes, persist, avoid, check = entry
    codes_joined = "、".join(codes)
    text = _manual_text(trainset, system, phenomenon, codes, persist, avoid, check)
    steps = "\n".join(
        line for line in text.splitlines() if line.startswith("步骤")
    )
    return FixtureDoc(
        path=f"{slug}.txt",
        category=Category.RAILWAY_EXPERTISE,
        text=text,
        rule_keys=(key, system),
        gen_questions=(
            f"{trainset}动车组{phenomenon}对应的故障代码有哪些？",
            f"{trainset}动车组出现{phenomenon}时随车机械师应如何确认故障？",
            f"{phenomenon}持续存在时{trainset}动车组应采取什么措施？",
        ),
        eval_question=(
            f"{trainset}动车组发生{phenomenon}（故障代码{codes_joined}）时，司机应如何处置？"
        ),
        eval_reference=steps,
    )


# --- operating regulations ----------------------------------------------------

_REGULATION_TOPICS = (
    ("01", "行车组织", "车站值班员", "行车设备检查记录"),
    ("02", "信号显示", "司机", "信号机显示状态"),
    ("03", "调度指挥", "列车调度员", "调度命令登记簿"),
    ("04", "限速管理", "工务段", "临时限速命令"),
    ("05", "接发列车", "助理值班员", "进路准备情况"),
    ("06", "施工维修", "施工负责人", "施工登记与销记"),
    ("07", "非正常行车", "司机", "引导信号与书面许可"),
    ("08", "车机联控", "随车机械师", "联控用语记录"),
    ("09", "应急处置", "应急值守人员", "应急预案文本"),
    ("10", "设备管理", "设备管理单位", "设备履历档案"),
)

_REG_CLAUSES = (
    "{topic}工作必须坚持安全第一的原则，严格执行本规程的各项规定。",
    "办理{topic}作业前，{role}应当确认{record}齐全有效。",
    "{topic}涉及的设备发生故障时，应当立即登记并通知设备管理单位处理。",
    "{topic}作业中发现危及行车安全的情况，应当先行停止作业并报告列车调度员。",
    "{role}执行{topic}任务时，不得同时办理与行车无关的其他事务。",
    "{topic}相关的记录资料应当保存备查，保存期限按有关规定执行。",
    "遇恶劣天气影响{topic}作业时，应当按规定采取限速或者停运措施。",
    "{topic}岗位人员应当定期参加业务培训并经考试合格后上岗。",
)


def _regulation_doc(num: str, topic: str, role: str, record: str, part_index: int) -> FixtureDoc:
    lines = [f"铁路技术管理规程 第{part_index}篇 {topic}", ""]
    for i, clause in enumerate(_REG_CLAUSES):
        body = clause.format(topic=topic, role=role, record=record)
        lines.append(f"第{100 * part_index + i + 1}条 {body}")
    text = "\n".join(lines) + "\n"
    first_article = lines[2]
    return FixtureDoc(
        path=f"Technical_Regulation_Part{num}.txt",
        category=Category.RAILWAY_REGULATION,
        text=text,
        rule_keys=(topic,),
        gen_questions=(
            f"{topic}工作应当坚持什么原则？",
            f"{role}在{topic}作业前需要确认什么？",
            f"{topic}作业中发现危及行车安全的情况应如何处理？",
        ),
        eval_question=f"{topic}工作必须坚持什么原则？",
        eval_reference=first_article,
    )


# --- safety ordinance -----------------------------------------------------------

_LEGAL_TOPICS = (
    ("1", "安全管理总则", "铁路运输企业"),
    ("2", "线路安全保护", "任何单位和个人"),
    ("3", "危险货物运输", "托运人"),
    ("4", "治安秩序管理", "旅客"),
    ("5", "从业人员资质", "动车组司机"),
    ("6", "事故调查处理", "事故调查组"),
    ("7", "监督检查", "铁路监督管理机构"),
    ("8", "法律责任", "违反本条例规定的单位"),
)

_LEGAL_CLAUSES = (
    "{topic}应当遵循依法管理、预防为主、确保安全的方针。",
    "{subject}必须遵守{topic}的有关规定，不得危害铁路运输安全。",
    "违反{topic}有关规定的，由铁路监督管理机构责令改正，并依法予以处理。",
    "{subject}在{topic}范围内发现安全隐患的，应当及时报告并配合消除隐患。",
    "{topic}的具体办法由国务院铁路行业监督管理部门依照本条例制定。",
    "{subject}拒不改正{topic}违法行为的，依法从重处罚；构成犯罪的，依法追究刑事责任。",
)


def _legal_doc(num: str, topic: str, subject: str, chapter_index: int) -> FixtureDoc:
    chapter_cn = "一二三四五六七八"[chapter_index - 1]
    lines = [f"铁路安全管理条例 第{chapter_cn}章 {topic}", ""]
    for i, clause in enumerate(_LEGAL_CLAUSES):
        body = clause.format(topic=topic, subject=subject)
        lines.append(f"第{10 * chapter_index + i + 1}条 {body}")
    text = "\n".join(lines) + "\n"
    first_article = lines[2]
    return FixtureDoc(
        path=f"Safety_Ordinance_Chapter{num}.txt",
        category=Category.LEGAL_PROVISION,
        text=text,
        rule_keys=(topic,),
        gen_questions=(
            f"{topic}应当遵循什么方针？",
            f"{subject}在{topic}方面承担哪些义务？",
            f"违反{topic}有关规定会受到什么处理？",
        ),
        eval_question=f"{topic}应当遵循什么方针？",
        eval_reference=first_article,
    )


# --- uncategorized extras --------------------------------------------------------

_OTHER_DOCS = (
    FixtureDoc(
        path="Glossary_of_Trainset_Terms.txt",
        category=Category.OTHER,
        text=(
            "动车组术语速查表\n"
            "\n"
            "牵引丢失：列车牵引力意外消失的现象，常伴随再生制动失效。\n"
            "分相区：接触网不同供电臂之间的无电区段，列车应惰行通过。\n"
            "随车机械师：负责监控动车组运行状态并处置途中故障的乘务人员。\n"
            "HMI：司机室人机界面，用于显示故障代码与列车状态。\n"
        ),
        rule_keys=("术语",),
        gen_questions=(
            "什么是牵引丢失？",
            "随车机械师负责哪些工作？",
            "列车应如何通过分相区？",
        ),
    ),
    FixtureDoc(
        path="Training_Base_Notice.txt",
        category=Category.OTHER,
        text=(
            "培训基地实训通知\n"
            "\n"
            "各机务段：本季度动车组模拟驾驶实训将安排故障场景演练课目，"
            "包括牵引故障、传感器故障与车门故障三类场景。"
            "请各单位在实训前组织学员复习相关应急处理手册，"
            "并携带本人驾驶证件按计划时间到培训基地报到。\n"
        ),
        rule_keys=("培训",),
        gen_questions=(
            "本季度实训安排了哪些故障场景课目？",
            "学员实训前需要做什么准备？",
        ),
    ),
)


def fixture_docs() -> list[FixtureDoc]:
    docs = [_manual_doc(entry) for entry in _MANUALS]
    docs += [
        _regulation_doc(num, topic, role, record, i + 1)
        for i, (num, topic, role, record) in enumerate(_REGULATION_TOPICS)
    ]
    docs += [
        _legal_doc(num, topic, subject, i + 1)
        for i, (num, topic, subject) in enumerate(_LEGAL_TOPICS)
    ]
    docs += list(_OTHER_DOCS)
    return docs


def fixture_manifest() -> dict[str, str]:
    """Path -> category for every categorized file; Other docs are omitted."""
    return {
        doc.path: doc.category.value
        for doc in fixture_docs()
        if doc.category is not Category.OTHER
    }


def fixture_documents() -> list[Document]:
    """The fixture corpus as in-memory Documents (same ids as a disk load)."""
    import hashlib

    docs = []
    for fd in sorted(fixture_docs(), key=lambda d: d.path):
        docs.append(
            Document(
                id="d" + hashlib.sha1(fd.path.encode("utf-8")).hexdigest()[:12],
                source_path=fd.path,
                category=fd.category,
                title=Path(fd.path).stem.replace("_", " "),
                text=fd.text,
                token_count=count_tokens(fd.text),
            )
        )
    return docs


# --- scripted backend -------------------------------------------------------------

def question_rules() -> list[ScriptRule]:
    """One regex rule per fixture document for the question-generation stage."""
    rules = []
    for doc in fixture_docs():
        lookaheads = "".join(
            f"(?=.*{re.escape(key)})" for key in (QUESTION_PROMPT_MARKER, *doc.rule_keys)
        )
        response = "\n".join(
            f"{i + 1}. {q}" for i, q in enumerate(doc.gen_questions)
        )
        rules.append(ScriptRule(pattern=lookaheads, response=response, regex=True))
    return rules


def exam_rules() -> list[ScriptRule]:
    rules = []
    for item_dict, answer in _EXAM_BANK:
        lookahead = (
            f"(?=.*{re.escape(EXAM_PROMPT_MARKER)})(?=.*{re.escape(item_dict['stem'])})"
        )
        rules.append(ScriptRule(pattern=lookahead, response=answer, regex=True))
    return rules


def scripted_backend(include_exam_rules: bool = True) -> BackendSpec:
    """The deterministic backend used by fixtures: exam rules, then the
    generic draft rule, then per-document question rules, then EchoContext
    (which serves both answer generation and refinement)."""
    rules: list[ScriptRule] = []
    if include_exam_rules:
        rules += exam_rules()
    rules.append(ScriptRule(pattern=DRAFT_PROMPT_MARKER, response=GENERIC_DRAFT))
    rules += question_rules()
    return BackendSpec(
        kind=BackendKind.SCRIPTED,
        rules=tuple(rules),
        fallback=FallbackMode.ECHO_CONTEXT,
    )


# --- evaluation set ------------------------------------------------------------------

def fixture_eval_pairs() -> list[QAPair]:
    """Evaluation pairs whose reference answers quote the corpus verbatim."""
    pairs = []
    for i, doc in enumerate(fixture_docs()):
        if doc.eval_question is None:
            continue
        pairs.append(
            QAPair(
                id=f"eval-{i:03d}",
                question=doc.eval_question,
                answer=doc.eval_reference,
                category=doc.category,
                source_chunk_id="",
            )
        )
    return pairs


# --- exam bank --------------------------------------------------------------------

_EXAM_BANK: tuple[tuple[dict, str], ...] = (
    (
        {
            "stem": "CR400AF动车组发生牵引丢失（故障代码3454）时，司机首先应当采取的措施是什么",
            "item_type": "SingleChoice",
            "options": [
                "利用剩余动力保持运行并立即通知随车机械师",
                "立即实施紧急制动停车",
                "断开主断路器并降弓",
                "继续全级位牵引运行",
            ],
            "key": "A",
            "category": "RailwayExpertise",
        },
        "CR400AF动车组发生牵引丢失故障时，司机首先应当利用剩余动力保持运行并立即通知随车机械师。",
    ),
    (
        {
            "stem": "办理接发列车作业前，助理值班员应当确认的内容是什么",
            "item_type": "SingleChoice",
            "options": ["进路准备情况", "旅客乘车人数", "餐车备品数量", "天气预报"],
            "key": "A",
            "category": "RailwayRegulation",
        },
        "办理接发列车作业前，助理值班员应当确认进路准备情况。",
    ),
    (
        {
            "stem": "违反铁路安全管理规定的行为，由哪个机构责令改正",
            "item_type": "SingleChoice",
            "options": ["铁路监督管理机构", "车站派出所", "列车长", "机务段调度"],
            "key": "A",
            "category": "LegalProvision",
        },
        "违反铁路安全管理规定的行为，由铁路监督管理机构责令改正。",
    ),
    (
        {
            "stem": "下列哪些属于动车组途中常见的故障类型",
            "item_type": "MultipleChoice",
            "options": ["牵引丢失", "速度传感器故障", "轴温传感器报警", "车票售罄"],
            "key": "ABC",
            "category": "RailwayExpertise",
        },
        "动车组途中常见的故障类型包括牵引丢失、速度传感器故障和轴温传感器报警。",
    ),
    (
        {
            "stem": "遇到哪些情况时应当停止施工维修作业",
            "item_type": "MultipleChoice",
            "options": ["发现危及行车安全的情况", "恶劣天气影响作业安全", "作业计划正常推进", "施工登记手续完备"],
            "key": "AB",
            "category": "RailwayRegulation",
        },
        "发现危及行车安全的情况或恶劣天气影响作业安全时，应当停止施工维修作业。",
    ),
    (
        {
            "stem": "哪些主体必须遵守线路安全保护的有关规定",
            "item_type": "MultipleChoice",
            "options": ["任何单位和个人", "仅铁路运输企业", "仅沿线居民", "仅施工单位"],
            "key": "A",
            "category": "LegalProvision",
        },
        "任何单位和个人都必须遵守线路安全保护的有关规定。",
    ),
    (
        {
            "stem": "动车组在车门未锁闭的状态下允许动车",
            "item_type": "TrueFalse",
            "options": [],
            "key": "false",
            "category": "RailwayExpertise",
        },
        "动车组在车门未锁闭的状态下不允许动车，这一说法的原判断是错误的。",
    ),
    (
        {
            "stem": "行车组织工作必须坚持安全第一的原则",
            "item_type": "TrueFalse",
            "options": [],
            "key": "true",
            "category": "RailwayRegulation",
        },
        "行车组织工作必须坚持安全第一的原则，这一说法是正确的。",
    ),
    (
        {
            "stem": "托运人可以在普通货物中夹带危险货物托运",
            "item_type": "TrueFalse",
            "options": [],
            "key": "false",
            "category": "LegalProvision",
        },
        "托运人不得在普通货物中夹带危险货物托运，原说法是错误的。",
    ),
)


def exam_bank_dicts() -> list[dict]:
    return [dict(item) for item, _answer in _EXAM_BANK]


# --- UI scenario presets ---------------------------------------------------------------

def scenario_presets() -> list[dict]:
    return [
        {
            "id": "traction-loss-3454",
            "name": "Traction loss 3454 (CR400AF)",
            "question": "CR400AF动车组发生牵引丢失（故障代码3454、3457）时，司机应如何处置？",
        },
        {
            "id": "traction-loss-20b5",
            "name": "Traction loss 20B5 (CRH3C/CRH380B)",
            "question": "CRH3C、CRH380B(L)动车组发生牵引丢失（故障代码20B5、21B0、2253）时，司机应如何处置？",
        },
        {
            "id": "speed-sensor-5502",
            "name": "Speed sensor fault 5502 (CR400AF)",
            "question": "CR400AF动车组出现速度传感器故障（故障代码5502）时，司机应如何处置？",
        },
        {
            "id": "axle-temp-5608",
            "name": "Axle temperature alarm 5608 (CRH380B)",
            "question": "CRH380B动车组出现轴温传感器报警（故障代码5608）时，司机应如何处置？",
        },
    ]


# --- materialization ----------------------------------------------------------------------

def backend_spec_dict(include_exam_rules: bool = True) -> dict:
    spec = scripted_backend(include_exam_rules)
    return {
        "kind": "Scripted",
        "rules": [
            {"pattern": r.pattern, "response": r.response, "regex": r.regex}
            for r in spec.rules
        ],
        "fallback": "EchoContext",
    }


def app_config_dict(score_threshold: float = 0.12, listen: str = "127.0.0.1:8763") -> dict:
    return {
        "corpus_dir": "data_source",
        "manifest": "manifest.json",
        "chunk": {"mode": "Structural", "chunk_size": 500, "overlap": 0},
        "embedder": {"kind": "Hashed", "dim": 256},
        "backend": backend_spec_dict(),
        "engine": {
            "top_k": 5,
            "score_threshold": score_threshold,
            "draft_template": "draft",
            "refine_template": "refine",
            "citation_prefix": "Referenced from: ",
        },
        "index_path": "var/index.bin",
        "listen": listen,
        "log_level": "INFO",
    }


def write_fixture_corpus(dest: str | Path) -> Path:
    """Materialize the corpus and every companion file under ``dest``."""
    dest = Path(dest)
    corpus_dir = dest / "data_source"
    corpus_dir.mkdir(parents=True, exist_ok=True)
    for doc in fixture_docs():
        (corpus_dir / doc.path).write_text(doc.text, encoding="utf-8")
    (dest / "manifest.json").write_text(
        json.dumps(fixture_manifest(), ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    with open(dest / "exam_bank.jsonl", "w", encoding="utf-8") as fh:
        for item in exam_bank_dicts():
            fh.write(json.dumps(item, ensure_ascii=False) + "\n")
    with open(dest / "eval_set.jsonl", "w", encoding="utf-8") as fh:
        for pair in fixture_eval_pairs():
            fh.write(json.dumps(pair.to_dict(), ensure_ascii=False) + "\n")
    (dest / "scenarios.json").write_text(
        json.dumps(scenario_presets(), ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )
    (dest / "service.config.json").write_text(
        json.dumps(app_config_dict(), ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )
    (dest / "service.passthrough.config.json").write_text(
        json.dumps(
            app_config_dict(score_threshold=1.01, listen="127.0.0.1:8764"),
            ensure_ascii=False,
            indent=2,
        )
        + "\n",
        encoding="utf-8",
    )
    return dest


if __name__ == "__main__":
    target = sys.argv[1] if len(sys.argv) > 1 else "fixtures"
    out = write_fixture_corpus(target)
    print(f"fixture corpus written under {out}")
