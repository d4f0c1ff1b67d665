'''
    Containers used by the approximate builder.

    Classes:
    --------
    FaceUniverse: Birth-ordered set of live faces with an optional size
    limit (oldest pruned first).

    CandidateHeap: Max-heap of (face, node) candidates with lazy deletion.
'''


from math import inf
from heapq import heappush, heappop
from collections import OrderedDict

from model import Face
from exception import InternalStateError


class FaceUniverse:
    '''
        Live faces keyed by face_id, in birth order.

        Attributes:
        -----------
        limit: Maximum number of live faces (math.inf for no limit).

        peak: Largest size observed by record_peak().

        Methods:
        --------
        add(face): Insert a newly created face.

        kill(face_id): Remove a face covered by a node.

        prune(): Remove the oldest faces until the limit holds. Returns the
        pruned faces.

        get(face_id): Returns the live face or None.

        live(): Returns the live faces, oldest first.
    '''

    def __init__(self, limit=inf):
        self.limit = limit
        self.peak = 0
        self._faces = OrderedDict()

    def add(self, face: Face):
        if face.face_id in self._faces:
            raise InternalStateError('Face %d already in the universe'
                                     % face.face_id)
        self._faces[face.face_id] = face

    def kill(self, face_id: int):
        face = self._faces.pop(face_id, None)
        if face is None:
            raise InternalStateError('Face %d is not alive' % face_id)
        face.alive = False
        return face

    def prune(self):
        pruned = []
        while len(self._faces) > self.limit:
            _, face = self._faces.popitem(last=False)
            face.alive = False
            pruned.append(face)
        return pruned

    def get(self, face_id: int):
        return self._faces.get(face_id)

    def live(self):
        return list(self._faces.values())

    def record_peak(self):
        self.peak = max(self.peak, len(self._faces))
        return self.peak

    def __len__(self):
        return len(self._faces)

    def __contains__(self, face_id: int):
        return face_id in self._faces


class CandidateHeap:
    '''
        Max-heap of candidates ordered by score (descending), then node id
        and face id (ascending). Entries are never removed eagerly: the
        consumer checks validity at pop time.
    '''

    def __init__(self):
        self._heap = []

    def push(self, score: float, node: int, face_id: int):
        heappush(self._heap, (-score, node, face_id))

    def pop(self):
        '''
            Returns (score, node, face_id) of the best entry, or None when
            the heap is empty.
        '''

        if not self._heap:
            return None
        neg, node, face_id = heappop(self._heap)
        return -neg, node, face_id

    def __len__(self):
        return len(self._heap)

    def __bool__(self):
        return bool(self._heap)
