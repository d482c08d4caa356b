# Copyright 2022 crashblame developers. See the top-level COPYRIGHT file for details.
#
# SPDX-License-Identifier: (Apache-2.0 OR MIT)

# Frame pools the synthetic generator draws from. Pools are grouped by the
# kind of code a frame belongs to; the generator's blame rule depends on it.

from dataclasses import asdict, dataclass, field
from typing import List

# Pool names, in the order mixture weights are listed
APP = "app"
DRIVER = "driver"
SYSTEM = "system"
STDLIB = "stdlib"
WRAPPER = "wrapper"
POOLS = (APP, DRIVER, SYSTEM, STDLIB, WRAPPER)

# Pools the blame scan walks past
SKIP_POOLS = (SYSTEM, STDLIB, WRAPPER)


@dataclass
class AppProfile:
    """
    One application: its own binaries, crash-reporting wrapper binaries, and
    the namespaces and methods its code frames are drawn from.
    """

    name: str
    binaries: List[str]
    methods: List[str]
    wrapper_binaries: List[str] = field(default_factory=list)
    namespaces: List[str] = field(default_factory=list)
    crash_prone_methods: List[str] = field(default_factory=list)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, content):
        return cls(
            name=content["name"],
            binaries=list(content["binaries"]),
            methods=list(content["methods"]),
            wrapper_binaries=list(content.get("wrapper_binaries", [])),
            namespaces=list(content.get("namespaces", [])),
            crash_prone_methods=list(content.get("crash_prone_methods", [])),
        )


# Methods touching memory, files, and thread state crash far more often
CRASH_PRONE_METHODS = [
    "CopyMemoryBlock",
    "AllocateSharedMemory",
    "MapMemoryRegion",
    "ReadFileChunk",
    "WriteFileBuffer",
    "LockThreadState",
    "ReleaseThreadMemory",
]

DEFAULT_APPS = [
    AppProfile(
        name="msedge",
        binaries=["msedge.dll"],
        wrapper_binaries=["msedge_elf.dll"],
        namespaces=[
            "gl::GLSurfaceAdapter",
            "gl::DirectCompositionChildSurfaceWin",
            "gpu::PassThroughImageTransportSurface",
            "viz::SkiaOutputDeviceGL",
            "content::RenderFrameHostImpl",
            "blink::LocalFrameView",
            "",
        ],
        methods=[
            "PostSubBuffer",
            "SwapBuffers",
            "ReleaseDrawTexture",
            "DrawFrame",
            "OnMessageReceived",
            "RunTask",
            "Present",
            "CommitNavigation",
            "UpdateLayout",
        ],
        crash_prone_methods=list(CRASH_PRONE_METHODS),
    ),
    AppProfile(
        name="excel",
        binaries=["excel.exe", "excel-calc.dll"],
        wrapper_binaries=["mso20win32client.dll"],
        namespaces=[
            "Calc::Engine",
            "Sheet::CellRange",
            "Xl::Workbook",
            "Chart::Renderer",
            "PivotTable::Cache",
            "",
        ],
        methods=[
            "Recalc",
            "SetValue",
            "LoadSheet",
            "RenderChart",
            "ApplyFormat",
            "SaveWorkbook",
            "RefreshPivot",
        ],
        crash_prone_methods=list(CRASH_PRONE_METHODS),
    ),
    AppProfile(
        name="outlook",
        binaries=["outlook.exe"],
        wrapper_binaries=["olmapi32.dll"],
        namespaces=[
            "Mail::Store",
            "Calendar::View",
            "Sync::Engine",
            "Ui::Ribbon",
            "",
        ],
        methods=[
            "SyncFolder",
            "OpenItem",
            "RenderView",
            "SendMessage",
            "ResolveRecipients",
            "RefreshInbox",
        ],
        crash_prone_methods=list(CRASH_PRONE_METHODS),
    ),
    AppProfile(
        name="winword",
        binaries=["winword.exe"],
        wrapper_binaries=["wwlib.dll"],
        namespaces=[
            "Doc::Layout",
            "Text::Paragraph",
            "Spell::Checker",
            "Ui::Canvas",
            "",
        ],
        methods=[
            "Paginate",
            "InsertText",
            "CheckWord",
            "PaintCanvas",
            "ReflowPage",
            "SaveDocument",
        ],
        crash_prone_methods=list(CRASH_PRONE_METHODS),
    ),
]

# Graphics and kernel drivers; the kernel ones end in .sys
DRIVER_FRAMES = [
    "igd10iumd64.dll!OpenAdapter10_2",
    "igd10iumd64.dll!DdiCreateResource",
    "igd10iumd64.dll!DdiPresentMultiplaneOverlay",
    "nvwgf2umx.dll!OpenAdapter12",
    "nvwgf2umx.dll!NVAPI_Thunk",
    "atidxx64.dll!XdxQueryTlsLookupTable",
    "atidxx64.dll!AmdDxGsaCompileShader",
    "nvlddmkm.sys!NvProcessInterrupt",
    "dxgkrnl.sys!DxgkSubmitCommand",
]

SYSTEM_FRAMES = [
    "d3d11.dll!NDXGI::CDevice::RotateResourceIdentities",
    "d3d11.dll!CContext::TID3D11DeviceContext_Flush_",
    "dxgi.dll!CDXGISwapChain::PresentImplCore",
    "dxgi.dll!CDXGISwapChain::PresentImpl",
    "dxgi.dll!CDXGISwapChain::[IDXGISwapChain4]::Present1",
    "user32.dll!UserCallWinProcCheckWow",
    "user32.dll!PeekMessageW",
    "combase.dll!CStdMarshal::UnmarshalObjRef",
    "rpcrt4.dll!NdrStubCall2",
    "kernelbase.dll!WaitForMultipleObjectsEx",
    "ntdll.dll!NtWaitForSingleObject",
    "ntdll.dll!TppWorkerThread",
]

# The system heap reports corruption from inside the allocator
HEAP_FRAMES = [
    "ntdll.dll!RtlReportCriticalFailure",
    "ntdll.dll!RtlpHeapHandleError",
    "ntdll.dll!RtlpLogHeapFailure",
    "ntdll.dll!RtlpFreeHeapInternal",
    "ntdll.dll!RtlFreeHeap",
]

STDLIB_FRAMES = [
    "ucrtbase.dll!abort",
    "ucrtbase.dll!free_base",
    "ucrtbase.dll!invoke_watson",
    "vcruntime140.dll!memcpy",
    "vcruntime140.dll!memset",
    "msvcp140.dll!std::basic_string<char>::assign",
    "msvcp140.dll!std::_Facet_Register",
]

# Standard library frames that raise on a broken precondition
STDLIB_THROWERS = [
    "msvcp140.dll!std::_Xout_of_range",
    "msvcp140.dll!std::_Xlength_error",
    "msvcp140.dll!std::_Xinvalid_argument",
]

# Topmost frames of a C++ throw, outermost helper last
EXCEPTION_HELPERS = [
    "kernelbase.dll!RaiseException",
    "vcruntime140.dll!_CxxThrowException",
    "ntdll.dll!RtlDispatchException",
]

# Crash reporting and logging symbols; they live in wrapper or app binaries
REPORTER_SYMBOLS = [
    "crash_reporter::DumpWithoutCrashing",
    "base::debug::DumpWithoutCrashing",
    "logging::LogMessage::~LogMessage",
    "logging::CheckError::~CheckError",
]

THREAD_START_FRAMES = [
    "kernel32.dll!BaseThreadInitThunk",
    "ntdll.dll!RtlUserThreadStart",
]
